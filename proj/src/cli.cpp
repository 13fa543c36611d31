#include "tpnn/cli.hpp"

#include "tpnn/analyzer.hpp"
#include "tpnn/codegen.hpp"
#include "tpnn/ingest.hpp"
#include "tpnn/interpreter.hpp"

#include <CLI11.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace tpnn::cli {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::IoFailure: return kIo;
    case ErrorCode::ManifestSyntax: return kManifestSyntax;
    case ErrorCode::UnsupportedVersion: return kUnsupportedVersion;
    case ErrorCode::ChecksumMismatch: return kChecksum;
    case ErrorCode::WeightsLengthMismatch: return kWeightsLength;
    case ErrorCode::UnsupportedLayer:
    case ErrorCode::UnsupportedActivation: return kUnsupportedLayer;
    case ErrorCode::IdentifierCollision:
    case ErrorCode::NonFiniteWeight: return kCodegen;
    case ErrorCode::ModeMismatch: return kUsage;
    case ErrorCode::EmptyNetwork:
    case ErrorCode::InvalidShape:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NonIntegralPoolOutput:
    case ErrorCode::SliceOutOfBounds:
    case ErrorCode::SliceOverlap:
    case ErrorCode::SliceGap:
    case ErrorCode::SliceLengthMismatch: return kInvalidNetwork;
    }
    return kInvalidNetwork;
}

namespace {

/// Raised for problems the CLI itself detects in user files.
struct CliFailure {
    int code;
    std::string message;
};

struct Options {
    std::string manifest;
    std::optional<std::string> weights;
    std::string mode = "fix16";
    std::string format = "text";
    std::optional<std::string> vectors;
    std::optional<std::uint64_t> seed;
    std::size_t count = 16;
    std::string out_dir;
    std::string harness_output;
    std::string prefix;
    bool verbose = false;
};

NumericMode parse_mode(const std::string& s) {
    return s == "float32" ? NumericMode::Float32 : NumericMode::Fix16;
}

/// Input vectors as decimals; converted per mode by the caller.
std::vector<std::vector<double>> read_vectors(const std::string& path, std::size_t arity) {
    std::istringstream in(read_file_text(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream words(line);
        std::vector<double> row;
        std::string word;
        while (words >> word) {
            double v = 0;
            const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
            if (ec != std::errc{} || ptr != word.data() + word.size()) {
                throw CliFailure{kFormat, path + ":" + std::to_string(line_no) + ": '" + word + "' is not a decimal number"};
            }
            row.push_back(v);
        }
        if (row.empty()) {
            continue;
        }
        if (row.size() != arity) {
            throw CliFailure{kInputShape, path + ":" + std::to_string(line_no) + ": vector has " +
                                              std::to_string(row.size()) + " values, network expects " +
                                              std::to_string(arity)};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<double>> random_vectors(std::uint64_t seed, std::size_t count, std::size_t arity) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> rows(count, std::vector<double>(arity));
    for (auto& row : rows) {
        for (auto& v : row) {
            v = dist(rng);
        }
    }
    return rows;
}

std::optional<std::vector<std::vector<double>>> input_vectors(const Options& o, std::size_t arity) {
    if (o.vectors) {
        return read_vectors(*o.vectors, arity);
    }
    if (o.seed) {
        return random_vectors(*o.seed, o.count, arity);
    }
    return std::nullopt;
}

std::vector<std::vector<float>> as_float(const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<float>> out;
    for (const auto& r : rows) {
        out.emplace_back(r.begin(), r.end());
    }
    return out;
}

std::vector<std::vector<Fix16>> as_fix16(const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<Fix16>> out;
    for (const auto& r : rows) {
        std::vector<Fix16> v;
        for (double x : r) {
            v.push_back(fx::from_real(x));
        }
        out.push_back(std::move(v));
    }
    return out;
}

/// Raw output words of the interpreter, one row per vector.
std::vector<std::vector<std::uint32_t>> interpret(const Network& net, NumericMode mode,
                                                  const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<std::uint32_t>> out;
    if (mode == NumericMode::Fix16) {
        for (const auto& r : run_batch(net, as_fix16(rows))) {
            std::vector<std::uint32_t> words;
            for (Fix16 v : r) {
                words.push_back(static_cast<std::uint32_t>(v.raw));
            }
            out.push_back(std::move(words));
        }
    } else {
        for (const auto& r : run_batch(net, as_float(rows))) {
            std::vector<std::uint32_t> words;
            for (float v : r) {
                words.push_back(std::bit_cast<std::uint32_t>(v));
            }
            out.push_back(std::move(words));
        }
    }
    return out;
}

std::string hex8(std::uint32_t w) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(w));
    return buf;
}

std::string decimal(std::uint32_t w, NumericMode mode) {
    char buf[48];
    const double v = mode == NumericMode::Fix16 ? Fix16::from_raw(static_cast<std::int32_t>(w)).to_double()
                                                : static_cast<double>(std::bit_cast<float>(w));
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? std::string(sep) : "") + parts[i];
    }
    return out;
}

/// Distance in representable floats; equal bit patterns and +0/-0 are 0.
std::uint64_t ulp_distance(std::uint32_t a, std::uint32_t b) {
    auto ordered = [](std::uint32_t bits) -> std::int64_t {
        return (bits & 0x80000000u) ? -static_cast<std::int64_t>(bits & 0x7fffffffu) : static_cast<std::int64_t>(bits);
    };
    const std::int64_t d = ordered(a) - ordered(b);
    return static_cast<std::uint64_t>(d < 0 ? -d : d);
}

Network load(const Options& o) {
    std::optional<std::filesystem::path> weights;
    if (o.weights) {
        weights = *o.weights;
    }
    return load_model_files(o.manifest, weights);
}

void print_cost(const CostReport& report, const Options& o, std::ostream& out) {
    out << (o.format == "tsv" ? to_tsv(report) : to_text(report));
}

int cmd_compile(const Options& o, std::ostream& out, std::ostream& err) {
    const Network net = load(o);
    const NumericMode mode = parse_mode(o.mode);
    CodegenConfig config;
    config.mode = mode;
    config.prefix = o.prefix;
    const EmittedUnit unit = generate(net, config);

    std::vector<EmittedFile> extra;
    if (auto rows = input_vectors(o, net.input_size())) {
        if (mode == NumericMode::Fix16) {
            const auto v = as_fix16(*rows);
            extra.push_back(emit_test_harness(unit, std::span<const std::vector<Fix16>>(v)));
        } else {
            const auto v = as_float(*rows);
            extra.push_back(emit_test_harness(unit, std::span<const std::vector<float>>(v)));
        }
    }
    try {
        write_unit(unit, o.out_dir, extra);
    } catch (const std::filesystem::filesystem_error& e) {
        throw Error(ErrorCode::IoFailure, e.what());
    }
    if (o.verbose) {
        for (const auto& f : unit.files()) {
            err << "wrote " << (std::filesystem::path(o.out_dir) / f.name).string() << "\n";
        }
        for (const auto& f : extra) {
            err << "wrote " << (std::filesystem::path(o.out_dir) / f.name).string() << "\n";
        }
    }
    const LintReport report = lint(unit);
    out << to_text(report);
    print_cost(cost_model(net), o, out);
    return report.passed() ? kOk : kVerificationFailed;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    const Network net = load(o);
    const NumericMode mode = parse_mode(o.mode);
    const auto rows = input_vectors(o, net.input_size());
    if (!rows) {
        err << "run: give --vectors FILE or --seed N\n";
        return kUsage;
    }
    const auto outputs = interpret(net, mode, *rows);
    if (o.format == "tsv") {
        out << "vector\thex\tdecimal\n";
    }
    for (std::size_t v = 0; v < outputs.size(); ++v) {
        std::vector<std::string> hex;
        std::vector<std::string> dec;
        for (std::uint32_t w : outputs[v]) {
            hex.push_back(hex8(w));
            dec.push_back(decimal(w, mode));
        }
        if (o.format == "tsv") {
            out << v << "\t" << join(hex, " ") << "\t" << join(dec, " ") << "\n";
        } else {
            out << join(hex, " ") << " | " << join(dec, " ") << "\n";
        }
    }
    return kOk;
}

std::vector<std::vector<std::uint32_t>> read_harness_output(const std::string& path) {
    std::istringstream in(read_file_text(path));
    std::vector<std::vector<std::uint32_t>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream words(line);
        std::vector<std::uint32_t> row;
        std::string word;
        while (words >> word) {
            std::uint32_t w = 0;
            const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), w, 16);
            if (word.size() != 8 || ec != std::errc{} || ptr != word.data() + word.size()) {
                throw CliFailure{kFormat, path + ":" + std::to_string(line_no) + ": '" + word +
                                              "' is not an 8-digit hex word"};
            }
            row.push_back(w);
        }
        if (!row.empty()) {
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

int cmd_diff(const Options& o, std::ostream& out, std::ostream& err) {
    const Network net = load(o);
    const NumericMode mode = parse_mode(o.mode);
    const auto actual = read_harness_output(o.harness_output);
    const auto rows = input_vectors(o, net.input_size());
    if (!rows) {
        err << "diff: give the --vectors FILE or --seed N the harness was built with\n";
        return kUsage;
    }
    const auto expected = interpret(net, mode, *rows);
    if (actual.size() != expected.size()) {
        throw CliFailure{kFormat, "harness output has " + std::to_string(actual.size()) + " lines for " +
                                      std::to_string(expected.size()) + " input vectors"};
    }
    if (expected.empty()) {
        err << "warning: nothing to compare\n";
        out << "PASS (0 vectors)\n";
        return kOk;
    }
    std::uint64_t worst = 0;
    for (std::size_t v = 0; v < expected.size(); ++v) {
        if (actual[v].size() != expected[v].size()) {
            throw CliFailure{kFormat, "harness line " + std::to_string(v + 1) + " has " +
                                          std::to_string(actual[v].size()) + " words, network has " +
                                          std::to_string(expected[v].size()) + " outputs"};
        }
        for (std::size_t k = 0; k < expected[v].size(); ++k) {
            const std::uint32_t e = expected[v][k];
            const std::uint32_t a = actual[v][k];
            bool same = e == a;
            if (!same && mode == NumericMode::Float32) {
                const float fe = std::bit_cast<float>(e);
                const float fa = std::bit_cast<float>(a);
                same = (std::isnan(fe) && std::isnan(fa)) ||
                       (!std::isnan(fe) && !std::isnan(fa) && ulp_distance(e, a) <= 4);
                if (same) {
                    worst = std::max(worst, ulp_distance(e, a));
                }
            }
            if (!same) {
                out << "FAIL: vector " << v << " output " << k << ": expected " << hex8(e) << " ("
                    << decimal(e, mode) << "), got " << hex8(a) << " (" << decimal(a, mode) << ")\n";
                return kVerificationFailed;
            }
        }
    }
    out << "PASS (" << expected.size() << " vectors";
    if (mode == NumericMode::Float32) {
        out << ", max " << worst << " ulp";
    }
    out << ")\n";
    return kOk;
}

int cmd_info(const Options& o, std::ostream& out) {
    const Network net = load(o);
    if (o.format == "tsv") {
        out << "name\t" << net.name() << "\n";
        out << "input\t" << net.input_shape().to_string() << "\n";
        for (std::size_t k = 0; k < net.layers().size(); ++k) {
            out << "layer" << k << "\t" << to_string(net.layers()[k].kind()) << "\t" << net.shapes()[k].to_string()
                << "\n";
        }
        out << "connections\t" << count_connections(net) << "\n";
    } else {
        out << "network      " << net.name() << "\n";
        out << "input        " << net.input_shape().to_string() << "\n";
        for (std::size_t k = 0; k < net.layers().size(); ++k) {
            const auto& layer = net.layers()[k];
            out << "layer " << k << "      " << to_string(layer.kind()) << " -> " << net.shapes()[k].to_string();
            if (layer.activation != Activation::Linear) {
                out << ", " << to_string(layer.activation);
            }
            out << "\n";
        }
        out << "connections  " << count_connections(net) << "\n";
    }
    print_cost(cost_model(net), o, out);
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"tpnnc: compiles feed-forward networks into analyzable C", "tpnnc"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("manifest", o.manifest, "Architecture manifest (JSON)")->required();
        sub->add_option("--weights", o.weights, "Weights blob (default: weights_file next to the manifest)");
        sub->add_option("--mode", o.mode, "Numeric mode")->check(CLI::IsMember({"fix16", "float32"}));
        sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "tsv"}));
        sub->add_flag("-v,--verbose", o.verbose, "Report files written");
    };
    auto add_vectors = [&](CLI::App* sub) {
        auto* vec = sub->add_option("--vectors", o.vectors, "Input vectors: one per line, whitespace-separated decimals");
        sub->add_option("--seed", o.seed, "Seed for uniform random vectors in [-1, 1]")->excludes(vec);
        sub->add_option("--count", o.count, "Number of random vectors")->check(CLI::NonNegativeNumber);
    };

    auto* compile = app.add_subcommand("compile", "Emit C sources, lint them and print the cost report");
    add_common(compile);
    add_vectors(compile);
    compile->add_option("--out", o.out_dir, "Output directory")->required();
    compile->add_option("--prefix", o.prefix, "Symbol prefix (default: network name)");

    auto* run_cmd = app.add_subcommand("run", "Run vectors through the reference interpreter");
    add_common(run_cmd);
    add_vectors(run_cmd);

    auto* diff = app.add_subcommand("diff", "Compare harness output with the interpreter");
    add_common(diff);
    add_vectors(diff);
    diff->add_option("harness_output", o.harness_output, "Captured stdout of the generated harness")->required();

    auto* info = app.add_subcommand("info", "Print shapes, connection count and cost report");
    add_common(info);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "tpnnc: " << e.what() << "\nrun 'tpnnc --help' for usage\n";
        return kUsage;
    }

    try {
        if (compile->parsed()) return cmd_compile(o, out, err);
        if (run_cmd->parsed()) return cmd_run(o, out, err);
        if (diff->parsed()) return cmd_diff(o, out, err);
        return cmd_info(o, out);
    } catch (const CliFailure& f) {
        err << "tpnnc: " << f.message << "\n";
        return f.code;
    } catch (const Error& e) {
        for (const auto& d : e.diagnostics()) {
            err << "tpnnc: " << d.describe() << "\n";
        }
        return exit_code_for(e.code());
    }
}

} // namespace tpnn::cli
