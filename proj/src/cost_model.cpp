#include "tpnn/analyzer.hpp"

#include <cstdio>
#include <variant>

namespace tpnn {

OpCounts& OpCounts::operator+=(const OpCounts& o) {
    macs += o.macs;
    activation_evals += o.activation_evals;
    loads += o.loads;
    stores += o.stores;
    return *this;
}

std::uint64_t cycle_estimate(const OpCounts& c, const CostWeights& w) {
    return c.macs * w.mac + c.activation_evals * w.activation + c.loads * w.load + c.stores * w.store;
}

namespace {

// Loads count every array read the emitted loop nest performs: the bias
// once per output plus one input and one weight per MAC.
OpCounts layer_counts(const LayerSpec& layer, const TensorShape& in_shape, const TensorShape& out_shape) {
    OpCounts c;
    const std::uint64_t out_elems = out_shape.element_count();
    if (const auto* d = std::get_if<DenseGeometry>(&layer.geometry)) {
        c.macs = std::uint64_t{d->in_count} * d->out_count;
        c.activation_evals = d->out_count;
        c.loads = std::uint64_t{d->out_count} * (2 * std::uint64_t{d->in_count} + 1);
        c.stores = d->out_count;
    } else if (const auto* k = std::get_if<Conv2dGeometry>(&layer.geometry)) {
        const std::uint64_t taps = std::uint64_t{k->kernel_h} * k->kernel_w * k->in_channels;
        c.macs = out_elems * taps;
        c.activation_evals = out_elems;
        c.loads = out_elems * (2 * taps + 1);
        c.stores = out_elems;
    } else if (const auto* p = std::get_if<Pool2dGeometry>(&layer.geometry)) {
        c.loads = out_elems * p->window_h * p->window_w;
        c.stores = out_elems;
    } else {
        c.loads = in_shape.element_count();
        c.stores = out_elems;
    }
    return c;
}

std::int64_t diff(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::int64_t>(b) - static_cast<std::int64_t>(a);
}

OpDeltas deltas(const OpCounts& a, const OpCounts& b) {
    return OpDeltas{diff(a.macs, b.macs), diff(a.activation_evals, b.activation_evals), diff(a.loads, b.loads),
                    diff(a.stores, b.stores)};
}

std::string row(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

} // namespace

CostReport cost_model(const Network& network, const CostWeights& weights) {
    CostReport report;
    report.weights = weights;
    for (std::size_t k = 0; k < network.layers().size(); ++k) {
        const LayerSpec& layer = network.layers()[k];
        LayerCost cost{layer.kind(), layer_counts(layer, network.input_shape_of(k), network.shapes()[k])};
        report.totals += cost.counts;
        report.layers.push_back(cost);
    }
    report.cycles = cycle_estimate(report.totals, weights);
    return report;
}

CostComparison compare_costs(const CostReport& a, const CostReport& b) {
    CostComparison out;
    out.ordering = a.cycles <=> b.cycles;
    out.totals = deltas(a.totals, b.totals);
    out.cycles = diff(a.cycles, b.cycles);
    const std::size_t common = std::min(a.layers.size(), b.layers.size());
    for (std::size_t k = 0; k < common; ++k) {
        out.layers.push_back(deltas(a.layers[k].counts, b.layers[k].counts));
    }
    return out;
}

std::string to_text(const CostReport& r) {
    std::string out = row("%-6s %-10s %12s %12s %12s %12s\n", "layer", "kind", "macs", "activations", "loads", "stores");
    auto line = [&](const std::string& label, std::string_view kind, const OpCounts& c) {
        out += row("%-6s %-10.*s %12llu %12llu %12llu %12llu\n", label.c_str(), static_cast<int>(kind.size()),
                   kind.data(), static_cast<unsigned long long>(c.macs),
                   static_cast<unsigned long long>(c.activation_evals), static_cast<unsigned long long>(c.loads),
                   static_cast<unsigned long long>(c.stores));
    };
    for (std::size_t k = 0; k < r.layers.size(); ++k) {
        line(std::to_string(k), to_string(r.layers[k].kind), r.layers[k].counts);
    }
    line("total", "", r.totals);
    out += row("cycles %llu (mac=%llu activation=%llu load=%llu store=%llu)\n",
               static_cast<unsigned long long>(r.cycles), static_cast<unsigned long long>(r.weights.mac),
               static_cast<unsigned long long>(r.weights.activation),
               static_cast<unsigned long long>(r.weights.load), static_cast<unsigned long long>(r.weights.store));
    return out;
}

std::string to_tsv(const CostReport& r) {
    std::string out = "layer\tkind\tmacs\tactivation_evals\tloads\tstores\n";
    auto line = [&](const std::string& label, std::string_view kind, const OpCounts& c) {
        out += label + "\t" + std::string(kind) + "\t" + std::to_string(c.macs) + "\t" +
               std::to_string(c.activation_evals) + "\t" + std::to_string(c.loads) + "\t" +
               std::to_string(c.stores) + "\n";
    };
    for (std::size_t k = 0; k < r.layers.size(); ++k) {
        line(std::to_string(k), to_string(r.layers[k].kind), r.layers[k].counts);
    }
    line("total", "-", r.totals);
    out += "cycles\t-\t" + std::to_string(r.cycles) + "\n";
    return out;
}

} // namespace tpnn
