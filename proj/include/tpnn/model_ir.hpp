#pragma once

#include "tpnn/error.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tpnn {

/// Shape of an activation tensor: (len), (h, w) or (h, w, channels).
/// Multi-dimensional tensors are stored row-major with channels innermost.
struct TensorShape {
    std::vector<std::size_t> dims;

    std::size_t rank() const noexcept { return dims.size(); }
    std::size_t element_count() const noexcept;
    bool valid() const noexcept;
    std::string to_string() const;

    friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

enum class LayerKind { Dense, Conv2d, AvgPool2d, MaxPool2d, Flatten };
enum class Activation { Linear, Relu, Sigmoid, Tanh };
enum class PoolMode { Average, Max };

std::string_view to_string(LayerKind kind);
std::string_view to_string(Activation activation);

/// Contiguous range [offset, offset + length) of the parameter array.
struct Slice {
    std::size_t offset = 0;
    std::size_t length = 0;

    std::size_t end() const noexcept { return offset + length; }
    friend bool operator==(const Slice&, const Slice&) = default;
};

/// Fully connected layer. Weights are row-major [input][output].
struct DenseGeometry {
    std::size_t in_count = 0;
    std::size_t out_count = 0;
    friend bool operator==(const DenseGeometry&, const DenseGeometry&) = default;
};

/// Valid-padding 2-D cross-correlation. Kernels are [kh][kw][in_ch][out_ch].
struct Conv2dGeometry {
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t stride_h = 1;
    std::size_t stride_w = 1;
    friend bool operator==(const Conv2dGeometry&, const Conv2dGeometry&) = default;
};

struct Pool2dGeometry {
    PoolMode mode = PoolMode::Max;
    std::size_t window_h = 0;
    std::size_t window_w = 0;
    std::size_t stride_h = 1;
    std::size_t stride_w = 1;
    friend bool operator==(const Pool2dGeometry&, const Pool2dGeometry&) = default;
};

struct FlattenGeometry {
    friend bool operator==(const FlattenGeometry&, const FlattenGeometry&) = default;
};

using LayerGeometry = std::variant<DenseGeometry, Conv2dGeometry, Pool2dGeometry, FlattenGeometry>;

struct LayerSpec {
    LayerGeometry geometry;
    Activation activation = Activation::Linear;
    Slice weights;
    Slice bias;

    LayerKind kind() const noexcept;
    bool has_parameters() const noexcept { return weights.length + bias.length > 0; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Unvalidated network description. Parameters are float32, referenced by
/// per-layer slices.
struct NetworkIR {
    std::string name;
    TensorShape input_shape;
    std::vector<LayerSpec> layers;
    std::vector<float> parameters;
};

/// Bitwise structural equality (parameters compared by their bit patterns).
bool identical(const NetworkIR& a, const NetworkIR& b);

/// Output shape of one layer applied to `input`; throws Error on
/// ShapeMismatch / NonIntegralPoolOutput.
TensorShape layer_output_shape(const LayerSpec& layer, const TensorShape& input);

/// One output shape per layer.
std::vector<TensorShape> infer_shapes(const NetworkIR& network);

/// Every invariant violation in `network`; empty means valid.
std::vector<Diagnostic> check(const NetworkIR& network);

/// Validated, immutable network. Only obtainable through validate().
class Network {
public:
    const NetworkIR& ir() const noexcept { return ir_; }
    const std::string& name() const noexcept { return ir_.name; }
    const TensorShape& input_shape() const noexcept { return ir_.input_shape; }
    const std::vector<LayerSpec>& layers() const noexcept { return ir_.layers; }
    const std::vector<float>& parameters() const noexcept { return ir_.parameters; }

    /// Output shape of each layer.
    const std::vector<TensorShape>& shapes() const noexcept { return shapes_; }
    const TensorShape& input_shape_of(std::size_t layer) const;

    std::size_t input_size() const noexcept { return ir_.input_shape.element_count(); }
    std::size_t output_size() const noexcept { return shapes_.back().element_count(); }

    std::span<const float> weights(std::size_t layer) const;
    std::span<const float> bias(std::size_t layer) const;

private:
    friend Network validate(NetworkIR network);
    Network(NetworkIR ir, std::vector<TensorShape> shapes)
        : ir_(std::move(ir)), shapes_(std::move(shapes)) {}

    NetworkIR ir_;
    std::vector<TensorShape> shapes_;
};

/// Throws Error carrying every diagnostic when the network is invalid.
Network validate(NetworkIR network);

/// Trainable parameter count, biases included.
std::uint64_t count_connections(const NetworkIR& network);
inline std::uint64_t count_connections(const Network& network) {
    return count_connections(network.ir());
}

/// Parameter count a layer must carry given its geometry.
std::size_t expected_weight_count(const LayerGeometry& geometry);
std::size_t expected_bias_count(const LayerGeometry& geometry);

/// Appends layers with canonical slices (manifest order, weights before
/// biases). Input-dependent geometry (dense in_count, conv in_channels) is
/// taken from the running shape.
class NetworkBuilder {
public:
    NetworkBuilder(std::string name, TensorShape input_shape);

    NetworkBuilder& dense(std::size_t units, Activation activation);
    NetworkBuilder& conv2d(std::size_t filters, std::size_t kernel_h, std::size_t kernel_w,
                           std::size_t stride_h, std::size_t stride_w, Activation activation);
    NetworkBuilder& pool2d(PoolMode mode, std::size_t window_h, std::size_t window_w,
                           std::size_t stride_h, std::size_t stride_w);
    NetworkBuilder& flatten();

    std::size_t parameter_count() const noexcept { return next_offset_; }
    const TensorShape& current_shape() const noexcept { return shape_; }

    /// Unvalidated IR with `parameters` attached (may be any length).
    NetworkIR build_ir(std::vector<float> parameters) const;
    /// Validated network; parameters must match parameter_count().
    Network build(std::vector<float> parameters) const;

private:
    NetworkIR ir_;
    TensorShape shape_;
    std::size_t next_offset_ = 0;
};

} // namespace tpnn
