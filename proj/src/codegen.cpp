#include "tpnn/codegen.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace tpnn {

namespace {

constexpr std::array<std::string_view, 37> kCKeywords = {
    "auto",     "break",    "case",     "char",   "const",    "continue", "default",  "do",
    "double",   "else",     "enum",     "extern", "float",    "for",      "goto",     "if",
    "inline",   "int",      "long",     "register", "restrict", "return", "short",    "signed",
    "sizeof",   "static",   "struct",   "switch", "typedef",  "union",    "unsigned", "void",
    "volatile", "while",    "_Bool",    "_Complex", "_Imaginary"};

constexpr int kValuesPerLine = 8;

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

/// Shortest decimal literal that reads back as exactly `v`.
std::string float_literal(float v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
    std::string s(buf);
    if (s.find_first_of(".e") == std::string::npos) {
        s += ".0";
    }
    return s + "f";
}

std::string fix_literal(Fix16 v) {
    if (v.raw == std::numeric_limits<std::int32_t>::min()) {
        return "(-2147483647 - 1)";
    }
    return std::to_string(v.raw);
}

std::string hex_word(std::uint32_t bits) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08xu", static_cast<unsigned>(bits));
    return buf;
}

template <class Range, class Fmt>
void append_values(std::string& out, const Range& values, Fmt&& fmt, std::string_view indent) {
    std::size_t n = 0;
    for (const auto& v : values) {
        if (n % kValuesPerLine == 0) {
            out += n == 0 ? "" : ",\n";
            out += indent;
        } else {
            out += ", ";
        }
        out += fmt(v);
        ++n;
    }
    out += "\n";
}

std::string term(std::string_view var, std::size_t scale) {
    if (scale == 1) {
        return std::string(var);
    }
    return std::string(var) + " * " + std::to_string(scale);
}

/// Emits the statements of one layer body; mode-specific arithmetic is
/// spelled by the helpers below.
class LayerWriter {
public:
    LayerWriter(NumericMode mode, std::string prefix) : mode_(mode), prefix_(std::move(prefix)) {}

    std::string type() const { return mode_ == NumericMode::Fix16 ? "fix16_t" : "float"; }
    bool fix() const { return mode_ == NumericMode::Fix16; }

    std::string mac(std::string_view a, std::string_view b) const {
        if (fix()) {
            return "acc = tp_fx_add(acc, tp_fx_mul(" + std::string(a) + ", " + std::string(b) + "));";
        }
        return "acc = acc + " + std::string(a) + " * " + std::string(b) + ";";
    }

    std::string add(std::string_view acc, std::string_view x) const {
        if (fix()) {
            return std::string(acc) + " = tp_fx_add(" + std::string(acc) + ", " + std::string(x) + ");";
        }
        return std::string(acc) + " = " + std::string(acc) + " + " + std::string(x) + ";";
    }

    std::string scale(std::string_view x, std::size_t window) const {
        if (fix()) {
            return "tp_fx_mul(" + std::string(x) + ", " + fix_literal(pool_reciprocal(window)) + ")";
        }
        return std::string(x) + " * " + float_literal(pool_reciprocal_f(window));
    }

    std::string zero() const { return fix() ? "0" : "0.0f"; }

    std::string activate(Activation f, std::string_view x) const {
        const std::string arg(x);
        switch (f) {
        case Activation::Relu: return (fix() ? "tp_fx_relu(" : "tp_relu_f(") + arg + ")";
        case Activation::Sigmoid: return (fix() ? "tp_fx_sigmoid(" : "tp_sigmoid_f(") + arg + ")";
        case Activation::Tanh: return (fix() ? "tp_fx_tanh(" : "tp_tanh_f(") + arg + ")";
        case Activation::Linear: break;
        }
        return arg;
    }

    std::string array_name(std::size_t layer, std::string_view what) const {
        return prefix_ + "_l" + std::to_string(layer) + "_" + std::string(what);
    }

    void dense(std::string& out, std::size_t k, const DenseGeometry& g, Activation f) const {
        const std::string w = array_name(k, "weights");
        const std::string b = array_name(k, "bias");
        out += "    int j;\n    int i;\n    " + type() + " acc;\n\n";
        out += "    for (j = 0; j < " + std::to_string(g.out_count) + "; ++j) {\n";
        out += "        acc = " + b + "[j];\n";
        out += "        for (i = 0; i < " + std::to_string(g.in_count) + "; ++i) {\n";
        out += "            " + mac("in[i]", w + "[" + term("i", g.out_count) + " + j]") + "\n";
        out += "        }\n";
        out += "        out[j] = " + activate(f, "acc") + ";\n";
        out += "    }\n";
    }

    void conv2d(std::string& out, std::size_t k, const Conv2dGeometry& g, Activation f,
                const TensorShape& in_shape, const TensorShape& out_shape) const {
        const std::string w = array_name(k, "weights");
        const std::string b = array_name(k, "bias");
        const std::size_t in_w = in_shape.dims[1];
        const std::size_t in_c = in_shape.dims[2];
        const std::size_t out_w = out_shape.dims[1];
        const std::string in_index = "((" + term("oy", g.stride_h) + " + ky) * " + std::to_string(in_w) +
                                     " + " + term("ox", g.stride_w) + " + kx) * " + std::to_string(in_c) +
                                     " + ic";
        const std::string w_index = "((ky * " + std::to_string(g.kernel_w) + " + kx) * " +
                                    std::to_string(in_c) + " + ic) * " + std::to_string(g.out_channels) +
                                    " + oc";
        out += "    int oy;\n    int ox;\n    int oc;\n    int ky;\n    int kx;\n    int ic;\n";
        out += "    " + type() + " acc;\n\n";
        out += "    for (oy = 0; oy < " + std::to_string(out_shape.dims[0]) + "; ++oy) {\n";
        out += "        for (ox = 0; ox < " + std::to_string(out_w) + "; ++ox) {\n";
        out += "            for (oc = 0; oc < " + std::to_string(g.out_channels) + "; ++oc) {\n";
        out += "                acc = " + b + "[oc];\n";
        out += "                for (ky = 0; ky < " + std::to_string(g.kernel_h) + "; ++ky) {\n";
        out += "                    for (kx = 0; kx < " + std::to_string(g.kernel_w) + "; ++kx) {\n";
        out += "                        for (ic = 0; ic < " + std::to_string(in_c) + "; ++ic) {\n";
        out += "                            " + mac("in[" + in_index + "]", w + "[" + w_index + "]") + "\n";
        out += "                        }\n";
        out += "                    }\n";
        out += "                }\n";
        out += "                out[(oy * " + std::to_string(out_w) + " + ox) * " +
               std::to_string(g.out_channels) + " + oc] = " + activate(f, "acc") + ";\n";
        out += "            }\n";
        out += "        }\n";
        out += "    }\n";
    }

    void pool2d(std::string& out, const Pool2dGeometry& g, const TensorShape& in_shape,
                const TensorShape& out_shape) const {
        const std::size_t in_w = in_shape.dims[1];
        const std::size_t ch = in_shape.dims[2];
        const std::size_t out_w = out_shape.dims[1];
        const std::string window_index = "((" + term("oy", g.stride_h) + " + ky) * " + std::to_string(in_w) +
                                         " + " + term("ox", g.stride_w) + " + kx) * " + std::to_string(ch) +
                                         " + c";
        const std::string first_index = "(" + term("oy", g.stride_h * in_w) + " + " +
                                        term("ox", g.stride_w) + ") * " + std::to_string(ch) + " + c";
        const bool is_max = g.mode == PoolMode::Max;
        out += "    int oy;\n    int ox;\n    int c;\n    int ky;\n    int kx;\n";
        out += is_max ? "    " + type() + " m;\n    " + type() + " v;\n\n" : "    " + type() + " sum;\n\n";
        out += "    for (oy = 0; oy < " + std::to_string(out_shape.dims[0]) + "; ++oy) {\n";
        out += "        for (ox = 0; ox < " + std::to_string(out_w) + "; ++ox) {\n";
        out += "            for (c = 0; c < " + std::to_string(ch) + "; ++c) {\n";
        out += is_max ? "                m = in[" + first_index + "];\n"
                      : "                sum = " + zero() + ";\n";
        out += "                for (ky = 0; ky < " + std::to_string(g.window_h) + "; ++ky) {\n";
        out += "                    for (kx = 0; kx < " + std::to_string(g.window_w) + "; ++kx) {\n";
        if (is_max) {
            out += "                        v = in[" + window_index + "];\n";
            out += "                        if (v > m) {\n";
            out += "                            m = v;\n";
            out += "                        }\n";
        } else {
            out += "                        " + add("sum", "in[" + window_index + "]") + "\n";
        }
        out += "                    }\n";
        out += "                }\n";
        const std::string result = is_max ? "m" : scale("sum", g.window_h * g.window_w);
        out += "                out[(oy * " + std::to_string(out_w) + " + ox) * " + std::to_string(ch) +
               " + c] = " + result + ";\n";
        out += "            }\n";
        out += "        }\n";
        out += "    }\n";
    }

    void flatten(std::string& out, std::size_t count) const {
        out += "    int i;\n\n";
        out += "    for (i = 0; i < " + std::to_string(count) + "; ++i) {\n";
        out += "        out[i] = in[i];\n";
        out += "    }\n";
    }

private:
    NumericMode mode_;
    std::string prefix_;
};

std::string float_activation_helpers(bool relu, bool sigmoid, bool tanh) {
    std::string out;
    if (relu) {
        out += "static float tp_relu_f(float x)\n{\n    return x > 0.0f ? x : 0.0f;\n}\n\n";
    }
    auto lut_fn = [&](std::string_view name, const fx::FloatLut& lut, std::string_view lo_value,
                      std::string_view range, std::string_view scale) {
        out += "static float " + std::string(name) + "(float x)\n{\n";
        out += "    static const float lut[257] = {\n";
        append_values(out, lut, float_literal, "        ");
        out += "    };\n";
        out += "    float t;\n    int idx;\n\n";
        out += "    if (!(x > -" + std::string(range) + ")) {\n        return " + std::string(lo_value) +
               ";\n    }\n";
        out += "    if (x >= " + std::string(range) + ") {\n        return 1.0f;\n    }\n";
        out += "    t = (x + " + std::string(range) + ") * " + std::string(scale) + ";\n";
        out += "    idx = (int)t;\n";
        out += "    if (idx >= 256) {\n        return lut[256];\n    }\n";
        out += "    return lut[idx] + (lut[idx + 1] - lut[idx]) * (t - (float)idx);\n}\n\n";
    };
    if (sigmoid) {
        lut_fn("tp_sigmoid_f", fx::sigmoid_table_f(), "0.0f", "8.0f", "16.0f");
    }
    if (tanh) {
        lut_fn("tp_tanh_f", fx::tanh_table_f(), "-1.0f", "4.0f", "32.0f");
    }
    return out;
}

std::string banner(std::string_view file, std::string_view what) {
    return "/* " + std::string(file) + ": " + std::string(what) + "\n * Generated by tpnnc. Do not edit.\n */\n";
}

} // namespace

std::vector<EmittedFile> EmittedUnit::files() const {
    std::vector<EmittedFile> out{header, source, weights};
    if (runtime) {
        out.push_back(*runtime);
    }
    return out;
}

std::string sanitize_prefix(std::string_view name) {
    std::string out;
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        out.push_back(std::isalnum(u) || c == '_' ? c : '_');
    }
    if (out.empty()) {
        out = "net";
    }
    if (std::isdigit(static_cast<unsigned char>(out.front()))) {
        out = "n" + out;
    }
    if (std::find(kCKeywords.begin(), kCKeywords.end(), out) != kCKeywords.end()) {
        throw Error(ErrorCode::IdentifierCollision, "prefix '" + out + "' is a C keyword");
    }
    if (out == "tp" || out.rfind("tp_", 0) == 0 || out.rfind("fix16", 0) == 0) {
        throw Error(ErrorCode::IdentifierCollision, "prefix '" + out + "' collides with the runtime namespace");
    }
    if (out.front() == '_' && (out.size() == 1 || out[1] == '_' || std::isupper(static_cast<unsigned char>(out[1])))) {
        throw Error(ErrorCode::IdentifierCollision, "prefix '" + out + "' is a reserved identifier");
    }
    return out;
}

std::string runtime_header_text() {
    std::string out = banner("tp_runtime.h", "Q16.16 fixed-point runtime");
    out += R"(#ifndef TP_RUNTIME_H
#define TP_RUNTIME_H

#include <stdint.h>

/* Q16.16: value = raw / 65536. All operations saturate. */
typedef int32_t fix16_t;

#define TP_FX_ONE 65536

static inline fix16_t tp_fx_saturate(int64_t v)
{
    if (v > 2147483647) {
        return 2147483647;
    }
    if (v < -2147483647 - 1) {
        return -2147483647 - 1;
    }
    return (fix16_t)v;
}

static inline fix16_t tp_fx_add(fix16_t a, fix16_t b)
{
    return tp_fx_saturate((int64_t)a + (int64_t)b);
}

static inline fix16_t tp_fx_sub(fix16_t a, fix16_t b)
{
    return tp_fx_saturate((int64_t)a - (int64_t)b);
}

/* Round half up on the discarded 16 bits. Assumes arithmetic right shift. */
static inline fix16_t tp_fx_mul(fix16_t a, fix16_t b)
{
    return tp_fx_saturate(((int64_t)a * (int64_t)b + 32768) >> 16);
}

static inline fix16_t tp_fx_relu(fix16_t a)
{
    return a > 0 ? a : 0;
}

)";
    auto lut_fn = [&](std::string_view name, const fx::Lut& lut, std::int32_t range, int shift,
                      std::string_view below, std::string_view above) {
        const std::string r = std::to_string(range);
        const std::string mask = std::to_string((1 << shift) - 1);
        const std::string half = std::to_string(1 << (shift - 1));
        out += "static inline fix16_t " + std::string(name) + "(fix16_t a)\n{\n";
        out += "    static const fix16_t lut[257] = {\n";
        append_values(out, lut, fix_literal, "        ");
        out += "    };\n";
        out += "    int64_t offset;\n    int64_t idx;\n    int64_t lo;\n    int64_t hi;\n\n";
        out += "    if (a < -" + r + ") {\n        return " + std::string(below) + ";\n    }\n";
        out += "    if (a > " + r + ") {\n        return " + std::string(above) + ";\n    }\n";
        out += "    offset = (int64_t)a + " + r + ";\n";
        out += "    idx = offset >> " + std::to_string(shift) + ";\n";
        out += "    if (idx >= 256) {\n        return lut[256];\n    }\n";
        out += "    lo = lut[idx];\n    hi = lut[idx + 1];\n";
        out += "    return (fix16_t)(lo + (((hi - lo) * (offset & " + mask + ") + " + half + ") >> " +
               std::to_string(shift) + "));\n}\n\n";
    };
    lut_fn("tp_fx_sigmoid", fx::sigmoid_table(), fx::kSigmoidRange, fx::kSigmoidStepShift, "0", "TP_FX_ONE");
    lut_fn("tp_fx_tanh", fx::tanh_table(), fx::kTanhRange, fx::kTanhStepShift, "-TP_FX_ONE", "TP_FX_ONE");
    out += "#endif /* TP_RUNTIME_H */\n";
    return out;
}

std::vector<std::size_t> activation_buffer_sizes(const Network& network) {
    const auto& shapes = network.shapes();
    const std::size_t intermediates = shapes.size() - 1;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < intermediates; ++i) {
        largest = std::max(largest, shapes[i].element_count());
    }
    return std::vector<std::size_t>(std::min<std::size_t>(intermediates, 2), largest);
}

std::size_t static_array_bytes(const Network& network) {
    std::size_t elements = count_connections(network);
    for (std::size_t n : activation_buffer_sizes(network)) {
        elements += n;
    }
    return elements * 4;
}

EmittedUnit generate(const Network& network, const CodegenConfig& config) {
    EmittedUnit unit;
    unit.prefix = sanitize_prefix(config.prefix.empty() ? network.name() : config.prefix);
    unit.mode = config.mode;
    unit.input_size = network.input_size();
    unit.output_size = network.output_size();

    const std::string& p = unit.prefix;
    const std::string P = upper(p);
    const LayerWriter writer(config.mode, p);
    const std::string T = writer.type();
    const bool fix = config.mode == NumericMode::Fix16;

    if (!fix) {
        for (float v : network.parameters()) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteWeight, "float32 emission needs finite parameters");
            }
        }
    }

    // Header.
    std::string h = banner(p + ".h", std::string("inference entry point (") + std::string(to_string(config.mode)) + ")");
    h += "#ifndef " + P + "_H\n#define " + P + "_H\n\n";
    if (fix) {
        h += "#include \"tp_runtime.h\"\n\n";
    }
    h += "#define " + P + "_IN_N " + std::to_string(unit.input_size) + "\n";
    h += "#define " + P + "_OUT_N " + std::to_string(unit.output_size) + "\n\n";
    h += "/* Not reentrant: activations live in static buffers, so allow one\n"
         " * invocation at a time per process. */\n";
    h += "void " + p + "_run(const " + T + " in[" + P + "_IN_N], " + T + " out[" + P + "_OUT_N]);\n\n";
    h += "#endif /* " + P + "_H */\n";
    unit.header = EmittedFile{p + ".h", std::move(h)};

    // Weights.
    const std::vector<Fix16> fixed = fix ? to_fix16(network.parameters()) : std::vector<Fix16>{};
    std::string w = banner(p + "_weights.c", "trained parameters");
    w += "#include \"" + p + ".h\"\n";
    std::string externs;
    for (std::size_t k = 0; k < network.layers().size(); ++k) {
        const LayerSpec& layer = network.layers()[k];
        for (auto [slice, what] : {std::pair{layer.weights, "weights"}, std::pair{layer.bias, "bias"}}) {
            if (slice.length == 0) {
                continue;
            }
            const std::string decl = "const " + T + " " + writer.array_name(k, what) + "[" +
                                     std::to_string(slice.length) + "]";
            externs += "extern " + decl + ";\n";
            w += "\n" + decl + " = {\n";
            if (fix) {
                append_values(w, std::span(fixed).subspan(slice.offset, slice.length), fix_literal, "    ");
            } else {
                append_values(w, std::span(network.parameters()).subspan(slice.offset, slice.length),
                              float_literal, "    ");
            }
            w += "};\n";
        }
    }
    unit.weights = EmittedFile{p + "_weights.c", std::move(w)};

    // Source.
    std::string s = banner(p + ".c", "layer functions");
    s += "#include \"" + p + ".h\"\n\n";
    if (!externs.empty()) {
        s += externs + "\n";
    }
    const auto buffers = activation_buffer_sizes(network);
    const std::array<std::string, 2> buffer_names{p + "_buf_a", p + "_buf_b"};
    for (std::size_t b = 0; b < buffers.size(); ++b) {
        s += "static " + T + " " + buffer_names[b] + "[" + std::to_string(buffers[b]) + "];\n";
    }
    if (!buffers.empty()) {
        s += "\n";
    }
    if (!fix) {
        bool relu = false;
        bool sigmoid = false;
        bool tanh = false;
        for (const auto& layer : network.layers()) {
            relu |= layer.activation == Activation::Relu;
            sigmoid |= layer.activation == Activation::Sigmoid;
            tanh |= layer.activation == Activation::Tanh;
        }
        s += float_activation_helpers(relu, sigmoid, tanh);
    }

    std::string entry = "void " + p + "_run(const " + T + " in[" + P + "_IN_N], " + T + " out[" + P + "_OUT_N])\n{\n";
    const std::size_t last = network.layers().size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const LayerSpec& layer = network.layers()[k];
        const TensorShape& in_shape = network.input_shape_of(k);
        const TensorShape& out_shape = network.shapes()[k];
        s += "/* layer " + std::to_string(k) + ": " + std::string(to_string(layer.kind())) + " " +
             in_shape.to_string() + " -> " + out_shape.to_string();
        if (layer.activation != Activation::Linear) {
            s += ", " + std::string(to_string(layer.activation));
        }
        s += " */\n";
        s += "static void " + p + "_layer" + std::to_string(k) + "(const " + T + " in[" +
             std::to_string(in_shape.element_count()) + "], " + T + " out[" +
             std::to_string(out_shape.element_count()) + "])\n{\n";
        if (const auto* d = std::get_if<DenseGeometry>(&layer.geometry)) {
            writer.dense(s, k, *d, layer.activation);
        } else if (const auto* c = std::get_if<Conv2dGeometry>(&layer.geometry)) {
            writer.conv2d(s, k, *c, layer.activation, in_shape, out_shape);
        } else if (const auto* pool = std::get_if<Pool2dGeometry>(&layer.geometry)) {
            writer.pool2d(s, *pool, in_shape, out_shape);
        } else {
            writer.flatten(s, out_shape.element_count());
        }
        s += "}\n\n";

        const std::string src = k == 0 ? "in" : buffer_names[(k - 1) % 2];
        const std::string dst = k == last ? "out" : buffer_names[k % 2];
        entry += "    " + p + "_layer" + std::to_string(k) + "(" + src + ", " + dst + ");\n";
    }
    entry += "}\n";
    s += entry;
    unit.source = EmittedFile{p + ".c", std::move(s)};

    if (fix && config.emit_runtime_header) {
        unit.runtime = EmittedFile{"tp_runtime.h", runtime_header_text()};
    }
    return unit;
}

namespace {

template <class Row, class ToBits>
EmittedFile harness(const EmittedUnit& unit, std::span<const Row> vectors, ToBits&& to_bits) {
    const std::string& p = unit.prefix;
    const std::string P = upper(p);
    const std::string T = unit.mode == NumericMode::Fix16 ? "fix16_t" : "float";
    for (const auto& v : vectors) {
        if (v.size() != unit.input_size) {
            throw Error(ErrorCode::ShapeMismatch, "harness vector has " + std::to_string(v.size()) +
                                                      " values, network expects " +
                                                      std::to_string(unit.input_size));
        }
    }
    std::string out = banner(p + "_harness.c", "runs fixed input vectors and prints raw output bits");
    out += "#include <stdint.h>\n#include <stdio.h>\n#include <string.h>\n\n";
    out += "#include \"" + p + ".h\"\n\n";
    out += "#define TP_VECTOR_COUNT " + std::to_string(vectors.size()) + "\n\n";
    // At least one row so the array is never zero-sized.
    out += "static const uint32_t tp_vectors[" + std::to_string(std::max<std::size_t>(vectors.size(), 1)) +
           "][" + P + "_IN_N] = {\n";
    if (vectors.empty()) {
        out += "    {0}\n";
    }
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        out += "    {\n";
        std::vector<std::string> words;
        for (const auto& x : vectors[r]) {
            words.push_back(hex_word(to_bits(x)));
        }
        append_values(out, words, [](const std::string& s) { return s; }, "        ");
        out += r + 1 == vectors.size() ? "    }\n" : "    },\n";
    }
    out += "};\n\n";
    out += "int main(void)\n{\n";
    out += "    int v;\n    int k;\n    uint32_t bits;\n";
    out += "    " + T + " in[" + P + "_IN_N];\n    " + T + " out[" + P + "_OUT_N];\n\n";
    out += "    for (v = 0; v < TP_VECTOR_COUNT; ++v) {\n";
    out += "        for (k = 0; k < " + P + "_IN_N; ++k) {\n";
    out += "            memcpy(&in[k], &tp_vectors[v][k], sizeof in[k]);\n";
    out += "        }\n";
    out += "        " + p + "_run(in, out);\n";
    out += "        for (k = 0; k < " + P + "_OUT_N; ++k) {\n";
    out += "            memcpy(&bits, &out[k], sizeof bits);\n";
    out += "            printf(k == 0 ? \"%08lx\" : \" %08lx\", (unsigned long)bits);\n";
    out += "        }\n";
    out += "        printf(\"\\n\");\n";
    out += "    }\n";
    out += "    return 0;\n}\n";
    return EmittedFile{p + "_harness.c", std::move(out)};
}

} // namespace

EmittedFile emit_test_harness(const EmittedUnit& unit, std::span<const std::vector<float>> vectors) {
    if (unit.mode != NumericMode::Float32) {
        throw Error(ErrorCode::ModeMismatch, "float32 vectors given to a fix16 unit");
    }
    return harness(unit, vectors, [](float x) { return std::bit_cast<std::uint32_t>(x); });
}

EmittedFile emit_test_harness(const EmittedUnit& unit, std::span<const std::vector<Fix16>> vectors) {
    if (unit.mode != NumericMode::Fix16) {
        throw Error(ErrorCode::ModeMismatch, "fix16 vectors given to a float32 unit");
    }
    return harness(unit, vectors, [](Fix16 x) { return static_cast<std::uint32_t>(x.raw); });
}

void write_unit(const EmittedUnit& unit, const std::filesystem::path& dir, std::span<const EmittedFile> extra) {
    std::filesystem::create_directories(dir);
    auto write = [&](const EmittedFile& f) {
        std::ofstream out(dir / f.name, std::ios::binary);
        out << f.text;
        if (!out) {
            throw Error(ErrorCode::IoFailure, "cannot write " + (dir / f.name).string());
        }
    };
    for (const auto& f : unit.files()) {
        write(f);
    }
    for (const auto& f : extra) {
        write(f);
    }
}

} // namespace tpnn
