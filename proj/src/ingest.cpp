#include "tpnn/ingest.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <memory>
#include <set>

#include "json.hpp"

namespace tpnn {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void syntax(const std::string& message) {
    throw Error(ErrorCode::ManifestSyntax, message);
}

std::optional<LayerKind> parse_kind(std::string_view s) {
    for (auto k : {LayerKind::Dense, LayerKind::Conv2d, LayerKind::AvgPool2d, LayerKind::MaxPool2d,
                   LayerKind::Flatten}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<Activation> parse_activation(std::string_view s) {
    for (auto a : {Activation::Linear, Activation::Relu, Activation::Sigmoid, Activation::Tanh}) {
        if (to_string(a) == s) {
            return a;
        }
    }
    return std::nullopt;
}

std::size_t positive(const Json& v, const std::string& what) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
        syntax(what + " must be a positive integer");
    }
    return static_cast<std::size_t>(v.get<std::uint64_t>());
}

std::array<std::size_t, 2> pair(const Json& v, const std::string& what) {
    if (!v.is_array() || v.size() != 2) {
        syntax(what + " must be a two-element array");
    }
    return {positive(v[0], what), positive(v[1], what)};
}

void require_keys(const Json& obj, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& where) {
    std::set<std::string> allowed;
    for (const char* k : required) {
        if (!obj.contains(k)) {
            syntax(where + ": missing field '" + k + "'");
        }
        allowed.insert(k);
    }
    for (const char* k : optional) {
        allowed.insert(k);
    }
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            syntax(where + ": unknown field '" + item.key() + "'");
        }
    }
}

LayerDescriptor parse_layer(const Json& j, std::size_t index) {
    const std::string where = "layers[" + std::to_string(index) + "]";
    if (!j.is_object()) {
        syntax(where + " must be an object");
    }
    if (!j.contains("kind") || !j["kind"].is_string()) {
        syntax(where + ": 'kind' must be a string");
    }
    const auto kind_name = j["kind"].get<std::string>();
    const auto kind = parse_kind(kind_name);
    if (!kind) {
        throw Error({Diagnostic{ErrorCode::UnsupportedLayer, index, "unknown layer kind '" + kind_name + "'"}});
    }

    LayerDescriptor d;
    d.kind = *kind;
    switch (d.kind) {
    case LayerKind::Dense:
        require_keys(j, {"kind", "activation", "units"}, {}, where);
        d.units = positive(j["units"], where + ".units");
        break;
    case LayerKind::Conv2d:
        require_keys(j, {"kind", "activation", "filters", "kernel", "stride"}, {}, where);
        d.filters = positive(j["filters"], where + ".filters");
        d.kernel = pair(j["kernel"], where + ".kernel");
        d.stride = pair(j["stride"], where + ".stride");
        break;
    case LayerKind::AvgPool2d:
    case LayerKind::MaxPool2d:
        require_keys(j, {"kind", "activation", "window", "stride"}, {}, where);
        d.window = pair(j["window"], where + ".window");
        d.stride = pair(j["stride"], where + ".stride");
        break;
    case LayerKind::Flatten:
        require_keys(j, {"kind", "activation"}, {}, where);
        break;
    }

    if (!j["activation"].is_string()) {
        syntax(where + ": 'activation' must be a string");
    }
    const auto act_name = j["activation"].get<std::string>();
    const auto act = parse_activation(act_name);
    if (!act) {
        throw Error({Diagnostic{ErrorCode::UnsupportedActivation, index,
                                "unknown activation '" + act_name + "'"}});
    }
    const bool parameterless = d.kind != LayerKind::Dense && d.kind != LayerKind::Conv2d;
    if (parameterless && *act != Activation::Linear) {
        throw Error({Diagnostic{ErrorCode::UnsupportedActivation, index,
                                kind_name + " layers must be linear, got '" + act_name + "'"}});
    }
    d.activation = *act;
    return d;
}

bool is_lower_hex_digest(const std::string& s) {
    if (s.size() != 64) {
        return false;
    }
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return true;
}

NetworkBuilder assemble(const ModelManifest& m) {
    NetworkBuilder builder(m.name, TensorShape{m.input_shape});
    if (!TensorShape{m.input_shape}.valid()) {
        throw Error(ErrorCode::InvalidShape, "input_shape must have 1-3 positive dims");
    }
    for (const auto& d : m.layers) {
        switch (d.kind) {
        case LayerKind::Dense:
            builder.dense(d.units, d.activation);
            break;
        case LayerKind::Conv2d:
            builder.conv2d(d.filters, d.kernel[0], d.kernel[1], d.stride[0], d.stride[1], d.activation);
            break;
        case LayerKind::AvgPool2d:
            builder.pool2d(PoolMode::Average, d.window[0], d.window[1], d.stride[0], d.stride[1]);
            break;
        case LayerKind::MaxPool2d:
            builder.pool2d(PoolMode::Max, d.window[0], d.window[1], d.stride[0], d.stride[1]);
            break;
        case LayerKind::Flatten:
            builder.flatten();
            break;
        }
    }
    return builder;
}

LayerDescriptor describe(const LayerSpec& layer) {
    LayerDescriptor d;
    d.kind = layer.kind();
    d.activation = layer.activation;
    if (const auto* dense = std::get_if<DenseGeometry>(&layer.geometry)) {
        d.units = dense->out_count;
    } else if (const auto* conv = std::get_if<Conv2dGeometry>(&layer.geometry)) {
        d.filters = conv->out_channels;
        d.kernel = {conv->kernel_h, conv->kernel_w};
        d.stride = {conv->stride_h, conv->stride_w};
    } else if (const auto* pool = std::get_if<Pool2dGeometry>(&layer.geometry)) {
        d.window = {pool->window_h, pool->window_w};
        d.stride = {pool->stride_h, pool->stride_w};
    }
    return d;
}

void append_le(std::vector<std::byte>& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::byte>((bits >> shift) & 0xFFu));
    }
}

float read_le(std::span<const std::byte> bytes, std::size_t index) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(bytes[index * 4 + b]) << (8 * b);
    }
    return std::bit_cast<float>(bits);
}

} // namespace

ModelManifest parse_manifest(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        syntax(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        syntax("manifest must be a JSON object");
    }
    if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
        syntax("missing integer field 'format_version'");
    }
    ModelManifest m;
    m.format_version = j["format_version"].get<int>();
    if (m.format_version != kManifestFormatVersion) {
        throw Error(ErrorCode::UnsupportedVersion,
                    "format_version " + std::to_string(m.format_version) + " is not supported");
    }
    require_keys(j, {"format_version", "name", "input_shape", "layers", "weights_file", "weights_checksum"},
                 {}, "manifest");

    if (!j["name"].is_string() || j["name"].get<std::string>().empty()) {
        syntax("'name' must be a non-empty string");
    }
    m.name = j["name"].get<std::string>();

    const Json& shape = j["input_shape"];
    if (!shape.is_array() || shape.empty() || shape.size() > 3) {
        syntax("'input_shape' must be an array of 1-3 positive integers");
    }
    for (const auto& d : shape) {
        m.input_shape.push_back(positive(d, "input_shape"));
    }

    const Json& layers = j["layers"];
    if (!layers.is_array() || layers.empty()) {
        syntax("'layers' must be a non-empty array");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        m.layers.push_back(parse_layer(layers[i], i));
    }

    if (!j["weights_file"].is_string() || j["weights_file"].get<std::string>().empty()) {
        syntax("'weights_file' must be a non-empty string");
    }
    m.weights_file = j["weights_file"].get<std::string>();

    if (!j["weights_checksum"].is_string() || !is_lower_hex_digest(j["weights_checksum"].get<std::string>())) {
        syntax("'weights_checksum' must be 64 lowercase hex digits");
    }
    m.weights_checksum = j["weights_checksum"].get<std::string>();
    return m;
}

std::string write_manifest(const ModelManifest& m) {
    Json j;
    j["format_version"] = m.format_version;
    j["name"] = m.name;
    j["input_shape"] = m.input_shape;
    Json layers = Json::array();
    for (const auto& d : m.layers) {
        Json l;
        l["kind"] = std::string(to_string(d.kind));
        l["activation"] = std::string(to_string(d.activation));
        switch (d.kind) {
        case LayerKind::Dense:
            l["units"] = d.units;
            break;
        case LayerKind::Conv2d:
            l["filters"] = d.filters;
            l["kernel"] = d.kernel;
            l["stride"] = d.stride;
            break;
        case LayerKind::AvgPool2d:
        case LayerKind::MaxPool2d:
            l["window"] = d.window;
            l["stride"] = d.stride;
            break;
        case LayerKind::Flatten:
            break;
        }
        layers.push_back(std::move(l));
    }
    j["layers"] = std::move(layers);
    j["weights_file"] = m.weights_file;
    j["weights_checksum"] = m.weights_checksum;
    return j.dump(2) + "\n";
}

std::string sha256_hex(std::span<const std::byte> data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0F]);
    }
    return out;
}

Network load_model(std::string_view manifest_text, std::span<const std::byte> weights) {
    const ModelManifest m = parse_manifest(manifest_text);
    const NetworkBuilder builder = assemble(m);

    const std::size_t expected = builder.parameter_count() * sizeof(float);
    if (weights.size() != expected) {
        throw WeightsLengthError(expected, weights.size());
    }
    if (sha256_hex(weights) != m.weights_checksum) {
        throw Error(ErrorCode::ChecksumMismatch, "weights blob does not match manifest checksum");
    }

    std::vector<float> params(builder.parameter_count());
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] = read_le(weights, i);
    }
    return builder.build(std::move(params));
}

SavedModel save_model(const Network& network, std::string weights_file) {
    SavedModel out;
    ModelManifest m;
    m.name = network.name();
    m.input_shape = network.input_shape().dims;
    m.weights_file = weights_file.empty() ? network.name() + ".bin" : std::move(weights_file);
    out.weights.reserve(count_connections(network) * sizeof(float));
    for (std::size_t i = 0; i < network.layers().size(); ++i) {
        m.layers.push_back(describe(network.layers()[i]));
        for (float v : network.weights(i)) {
            append_le(out.weights, v);
        }
        for (float v : network.bias(i)) {
            append_le(out.weights, v);
        }
    }
    m.weights_checksum = sha256_hex(out.weights);
    out.manifest = write_manifest(m);
    return out;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    }
    std::vector<std::byte> bytes(chars.size());
    std::transform(chars.begin(), chars.end(), bytes.begin(), [](char c) { return static_cast<std::byte>(c); });
    return bytes;
}

std::string read_file_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Network load_model_files(const std::filesystem::path& manifest_path,
                         const std::optional<std::filesystem::path>& weights_path) {
    const std::string text = read_file_text(manifest_path);
    std::filesystem::path blob_path;
    if (weights_path) {
        blob_path = *weights_path;
    } else {
        blob_path = manifest_path.parent_path() / parse_manifest(text).weights_file;
    }
    return load_model(text, read_file_bytes(blob_path));
}

std::filesystem::path save_model_files(const Network& network, const std::filesystem::path& dir) {
    const SavedModel saved = save_model(network);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    }
    const auto manifest_path = dir / (network.name() + ".json");
    const auto blob_path = dir / (network.name() + ".bin");
    {
        std::ofstream out(manifest_path, std::ios::binary);
        out << saved.manifest;
        if (!out) {
            throw Error(ErrorCode::IoFailure, "cannot write " + manifest_path.string());
        }
    }
    std::ofstream out(blob_path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(saved.weights.data()),
              static_cast<std::streamsize>(saved.weights.size()));
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot write " + blob_path.string());
    }
    return manifest_path;
}

} // namespace tpnn
