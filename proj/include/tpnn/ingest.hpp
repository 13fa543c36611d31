#pragma once

#include "tpnn/model_ir.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tpnn {

inline constexpr int kManifestFormatVersion = 1;

/// One layer of the manifest. Input-dependent sizes (dense inputs, conv
/// input channels) are not stored; they follow from the shape chain.
struct LayerDescriptor {
    LayerKind kind = LayerKind::Dense;
    Activation activation = Activation::Linear;
    std::size_t units = 0;                   // dense
    std::size_t filters = 0;                 // conv2d
    std::array<std::size_t, 2> kernel{};     // conv2d
    std::array<std::size_t, 2> window{};     // pools
    std::array<std::size_t, 2> stride{1, 1}; // conv2d, pools

    friend bool operator==(const LayerDescriptor&, const LayerDescriptor&) = default;
};

/// Architecture manifest: a UTF-8 JSON object with exactly the fields
/// format_version, name, input_shape, layers, weights_file and
/// weights_checksum (lowercase hex SHA-256 of the weights blob).
struct ModelManifest {
    int format_version = kManifestFormatVersion;
    std::string name;
    std::vector<std::size_t> input_shape;
    std::vector<LayerDescriptor> layers;
    std::string weights_file;
    std::string weights_checksum;
};

ModelManifest parse_manifest(std::string_view text);
std::string write_manifest(const ModelManifest& manifest);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::byte> data);

/// Builds and validates a network from a manifest and its weights blob
/// (little-endian float32, layer order, weights before biases). Throws
/// Error on any problem; never returns a partial network.
Network load_model(std::string_view manifest_text, std::span<const std::byte> weights);

struct SavedModel {
    std::string manifest;
    std::vector<std::byte> weights;
};

/// Serializes in canonical parameter order. `weights_file` defaults to
/// "<name>.bin".
SavedModel save_model(const Network& network, std::string weights_file = {});

/// Reads manifest and blob from disk. Without `weights_path` the blob is
/// looked up as the manifest's weights_file relative to the manifest.
Network load_model_files(const std::filesystem::path& manifest_path,
                         const std::optional<std::filesystem::path>& weights_path = std::nullopt);

/// Writes <dir>/<name>.json and the blob next to it; returns the manifest path.
std::filesystem::path save_model_files(const Network& network, const std::filesystem::path& dir);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

} // namespace tpnn
