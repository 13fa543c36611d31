#include "oracles.hpp"

#include "tpnn/fixedpoint.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

namespace tpnn::testing::oracle {

std::int32_t clamp_raw(long double exact) {
    constexpr long double lo = std::numeric_limits<std::int32_t>::min();
    constexpr long double hi = std::numeric_limits<std::int32_t>::max();
    if (exact < lo) return std::numeric_limits<std::int32_t>::min();
    if (exact > hi) return std::numeric_limits<std::int32_t>::max();
    return static_cast<std::int32_t>(exact);
}

std::int32_t fx_add(std::int32_t a, std::int32_t b) {
    return clamp_raw(static_cast<long double>(a) + b);
}

std::int32_t fx_sub(std::int32_t a, std::int32_t b) {
    return clamp_raw(static_cast<long double>(a) - b);
}

std::int32_t fx_mul(std::int32_t a, std::int32_t b) {
    // floor((a*b)/2^16 + 1/2): the exact product fits in int64.
    const std::int64_t q = static_cast<std::int64_t>(a) * b + 32768;
    std::int64_t floor_div = q / 65536;
    if (q % 65536 != 0 && q < 0) {
        --floor_div;
    }
    return clamp_raw(static_cast<long double>(floor_div));
}

std::int32_t fx_from_real(double x) {
    if (std::isnan(x)) return 0;
    const long double scaled = static_cast<long double>(x) * 65536.0L;
    long double whole = std::trunc(scaled);
    if (std::fabs(scaled - whole) >= 0.5L) {
        whole += scaled < 0 ? -1.0L : 1.0L;
    }
    return clamp_raw(whole);
}

ConnectionSet connection_set(const Network& net) {
    ConnectionSet set;
    set.layer_begin.push_back(0);
    set.neuron_count = net.input_size();
    set.bias.assign(net.input_size(), 0.0f);
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        const auto* d = std::get_if<DenseGeometry>(&net.layers()[k].geometry);
        if (!d) {
            throw std::invalid_argument("connection sets cover dense layers only");
        }
        const std::size_t src = set.layer_begin.back();
        const std::size_t dst = set.neuron_count;
        set.layer_begin.push_back(dst);
        set.activation.push_back(net.layers()[k].activation);
        const auto w = net.weights(k);
        const auto b = net.bias(k);
        for (std::size_t i = 0; i < d->in_count; ++i) {
            for (std::size_t j = 0; j < d->out_count; ++j) {
                set.connections.push_back({src + i, dst + j, w[i * d->out_count + j]});
            }
        }
        set.bias.insert(set.bias.end(), b.begin(), b.end());
        set.neuron_count += d->out_count;
    }
    set.layer_begin.push_back(set.neuron_count);
    return set;
}

namespace {

template <class T, class Mac, class Act>
std::vector<T> run(const ConnectionSet& set, const std::vector<T>& input, T (*bias)(float), Mac&& mac, Act&& act) {
    std::vector<T> n(set.neuron_count);
    for (std::size_t i = 0; i < input.size(); ++i) {
        n[i] = input[i]; // from_input(I, n_I)
    }
    const std::size_t layers = set.layer_begin.size() - 2;
    for (std::size_t l = 1; l <= layers; ++l) {
        for (std::size_t i = set.layer_begin[l]; i < set.layer_begin[l + 1]; ++i) {
            n[i] = bias(set.bias[i]);
            for (const Connection& c : set.connections) {
                if (c.to == i) {
                    n[i] = mac(n[i], n[c.from], c.weight);
                }
            }
            n[i] = act(set.activation[l - 1], n[i]);
        }
    }
    return std::vector<T>(n.begin() + static_cast<std::ptrdiff_t>(set.layer_begin[layers]), n.end());
}

} // namespace

std::vector<float> run_float(const ConnectionSet& set, const std::vector<float>& input) {
    return run<float>(
        set, input, +[](float b) { return b; },
        [](float acc, float x, float w) {
            const float product = x * w;
            return acc + product;
        },
        [](Activation f, float v) {
            // The activation tables are normative; reuse the library's.
            switch (f) {
            case Activation::Relu: return v > 0.0f ? v : 0.0f;
            case Activation::Sigmoid: return fx::sigmoid_f(v);
            case Activation::Tanh: return fx::tanh_f(v);
            case Activation::Linear: break;
            }
            return v;
        });
}

std::vector<std::int32_t> run_fix16(const ConnectionSet& set, const std::vector<std::int32_t>& input) {
    return run<std::int32_t>(
        set, input, +[](float b) { return fx_from_real(b); },
        [](std::int32_t acc, std::int32_t x, float w) { return fx_add(acc, fx_mul(x, fx_from_real(w))); },
        [](Activation f, std::int32_t v) {
            switch (f) {
            case Activation::Relu: return v > 0 ? v : 0;
            case Activation::Sigmoid: return fx::sigmoid(Fix16{v}).raw;
            case Activation::Tanh: return fx::tanh(Fix16{v}).raw;
            case Activation::Linear: break;
            }
            return v;
        });
}

} // namespace tpnn::testing::oracle
