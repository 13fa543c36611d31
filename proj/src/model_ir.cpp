#include "tpnn/model_ir.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <numeric>

namespace tpnn {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

bool valid_activation(Activation a) {
    switch (a) {
    case Activation::Linear:
    case Activation::Relu:
    case Activation::Sigmoid:
    case Activation::Tanh:
        return true;
    }
    return false;
}

Error shape_error(ErrorCode code, std::size_t layer, const std::string& message) {
    return Error({Diagnostic{code, layer, message}});
}

// Output extent of a valid-padding window sweep; nullopt when the stride
// does not tile the input exactly.
std::optional<std::size_t> window_extent(std::size_t in, std::size_t window, std::size_t stride) {
    if ((in - window) % stride != 0) {
        return std::nullopt;
    }
    return (in - window) / stride + 1;
}

TensorShape spatial_output(const TensorShape& input, std::size_t window_h, std::size_t window_w,
                           std::size_t stride_h, std::size_t stride_w, std::size_t channels,
                           std::string_view what) {
    if (input.rank() != 3) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::string(what) + " needs an (h, w, channels) input, got " + input.to_string());
    }
    if (window_h == 0 || window_w == 0 || stride_h == 0 || stride_w == 0) {
        throw Error(ErrorCode::InvalidShape, std::string(what) + " window and stride must be positive");
    }
    if (window_h > input.dims[0] || window_w > input.dims[1]) {
        throw Error(ErrorCode::ShapeMismatch, std::string(what) + " window " +
                                                  std::to_string(window_h) + "x" +
                                                  std::to_string(window_w) + " exceeds input " +
                                                  input.to_string());
    }
    auto out_h = window_extent(input.dims[0], window_h, stride_h);
    auto out_w = window_extent(input.dims[1], window_w, stride_w);
    if (!out_h || !out_w) {
        throw Error(ErrorCode::NonIntegralPoolOutput,
                    std::string(what) + " stride does not tile input " + input.to_string() + " exactly");
    }
    return TensorShape{{*out_h, *out_w, channels}};
}

} // namespace

std::size_t TensorShape::element_count() const noexcept {
    if (dims.empty()) {
        return 0;
    }
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

bool TensorShape::valid() const noexcept {
    return !dims.empty() && dims.size() <= 3 &&
           std::all_of(dims.begin(), dims.end(), [](std::size_t d) { return d > 0; });
}

std::string TensorShape::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i != 0) {
            out += ",";
        }
        out += std::to_string(dims[i]);
    }
    return out + ")";
}

std::string_view to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::AvgPool2d: return "avgpool2d";
    case LayerKind::MaxPool2d: return "maxpool2d";
    case LayerKind::Flatten: return "flatten";
    }
    return "unknown";
}

std::string_view to_string(Activation activation) {
    switch (activation) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    }
    return "unknown";
}

LayerKind LayerSpec::kind() const noexcept {
    return std::visit(Overloaded{
                          [](const DenseGeometry&) { return LayerKind::Dense; },
                          [](const Conv2dGeometry&) { return LayerKind::Conv2d; },
                          [](const Pool2dGeometry& p) {
                              return p.mode == PoolMode::Average ? LayerKind::AvgPool2d
                                                                 : LayerKind::MaxPool2d;
                          },
                          [](const FlattenGeometry&) { return LayerKind::Flatten; },
                      },
                      geometry);
}

bool identical(const NetworkIR& a, const NetworkIR& b) {
    if (a.name != b.name || a.input_shape != b.input_shape || a.layers != b.layers ||
        a.parameters.size() != b.parameters.size()) {
        return false;
    }
    return a.parameters.empty() ||
           std::memcmp(a.parameters.data(), b.parameters.data(), a.parameters.size() * sizeof(float)) == 0;
}

std::size_t expected_weight_count(const LayerGeometry& geometry) {
    return std::visit(Overloaded{
                          [](const DenseGeometry& d) { return d.in_count * d.out_count; },
                          [](const Conv2dGeometry& c) {
                              return c.kernel_h * c.kernel_w * c.in_channels * c.out_channels;
                          },
                          [](const Pool2dGeometry&) { return std::size_t{0}; },
                          [](const FlattenGeometry&) { return std::size_t{0}; },
                      },
                      geometry);
}

std::size_t expected_bias_count(const LayerGeometry& geometry) {
    return std::visit(Overloaded{
                          [](const DenseGeometry& d) { return d.out_count; },
                          [](const Conv2dGeometry& c) { return c.out_channels; },
                          [](const Pool2dGeometry&) { return std::size_t{0}; },
                          [](const FlattenGeometry&) { return std::size_t{0}; },
                      },
                      geometry);
}

TensorShape layer_output_shape(const LayerSpec& layer, const TensorShape& input) {
    return std::visit(
        Overloaded{
            [&](const DenseGeometry& d) {
                if (d.in_count == 0 || d.out_count == 0) {
                    throw Error(ErrorCode::InvalidShape, "dense layer needs positive in/out counts");
                }
                if (input.rank() != 1 || input.dims[0] != d.in_count) {
                    throw Error(ErrorCode::ShapeMismatch, "dense layer expects (" +
                                                              std::to_string(d.in_count) + "), got " +
                                                              input.to_string());
                }
                return TensorShape{{d.out_count}};
            },
            [&](const Conv2dGeometry& c) {
                if (c.in_channels == 0 || c.out_channels == 0) {
                    throw Error(ErrorCode::InvalidShape, "conv2d needs positive channel counts");
                }
                if (input.rank() == 3 && input.dims[2] != c.in_channels) {
                    throw Error(ErrorCode::ShapeMismatch,
                                "conv2d expects " + std::to_string(c.in_channels) +
                                    " input channels, got " + input.to_string());
                }
                return spatial_output(input, c.kernel_h, c.kernel_w, c.stride_h, c.stride_w,
                                      c.out_channels, "conv2d");
            },
            [&](const Pool2dGeometry& p) {
                const std::size_t channels = input.rank() == 3 ? input.dims[2] : 0;
                return spatial_output(input, p.window_h, p.window_w, p.stride_h, p.stride_w,
                                      channels, "pool2d");
            },
            [&](const FlattenGeometry&) { return TensorShape{{input.element_count()}}; },
        },
        layer.geometry);
}

std::vector<TensorShape> infer_shapes(const NetworkIR& network) {
    if (network.layers.empty()) {
        throw Error(ErrorCode::EmptyNetwork, "network has no layers");
    }
    if (!network.input_shape.valid()) {
        throw Error(ErrorCode::InvalidShape, "input shape " + network.input_shape.to_string() +
                                                 " must have rank 1-3 and positive dims");
    }
    std::vector<TensorShape> shapes;
    shapes.reserve(network.layers.size());
    const TensorShape* current = &network.input_shape;
    for (std::size_t i = 0; i < network.layers.size(); ++i) {
        try {
            shapes.push_back(layer_output_shape(network.layers[i], *current));
        } catch (const Error& e) {
            throw shape_error(e.code(), i, e.diagnostics().front().message);
        }
        current = &shapes.back();
    }
    return shapes;
}

std::vector<Diagnostic> check(const NetworkIR& network) {
    std::vector<Diagnostic> out;
    auto report = [&](ErrorCode code, std::optional<std::size_t> layer, std::string message) {
        out.push_back(Diagnostic{code, layer, std::move(message)});
    };

    if (!network.input_shape.valid()) {
        report(ErrorCode::InvalidShape, std::nullopt,
               "input shape " + network.input_shape.to_string() + " must have rank 1-3 and positive dims");
    }
    if (network.layers.empty()) {
        report(ErrorCode::EmptyNetwork, std::nullopt, "network has no layers");
        return out;
    }

    struct Claim {
        Slice slice;
        std::size_t layer;
    };
    std::vector<Claim> claims;
    const std::size_t param_count = network.parameters.size();

    for (std::size_t i = 0; i < network.layers.size(); ++i) {
        const LayerSpec& layer = network.layers[i];
        if (!valid_activation(layer.activation)) {
            report(ErrorCode::UnsupportedActivation, i,
                   "activation id " + std::to_string(static_cast<int>(layer.activation)));
        }
        if (const auto* pool = std::get_if<Pool2dGeometry>(&layer.geometry)) {
            if (pool->mode != PoolMode::Average && pool->mode != PoolMode::Max) {
                report(ErrorCode::UnsupportedLayer, i,
                       "pool mode id " + std::to_string(static_cast<int>(pool->mode)));
            }
        }
        const bool parameterless = std::holds_alternative<Pool2dGeometry>(layer.geometry) ||
                                   std::holds_alternative<FlattenGeometry>(layer.geometry);
        if (parameterless && layer.activation != Activation::Linear && valid_activation(layer.activation)) {
            report(ErrorCode::UnsupportedActivation, i,
                   std::string(to_string(layer.kind())) + " layers must be linear, got " +
                       std::string(to_string(layer.activation)));
        }

        const std::size_t want_w = expected_weight_count(layer.geometry);
        const std::size_t want_b = expected_bias_count(layer.geometry);
        if (layer.weights.length != want_w) {
            report(ErrorCode::SliceLengthMismatch, i,
                   "weight slice holds " + std::to_string(layer.weights.length) + " values, geometry needs " +
                       std::to_string(want_w));
        }
        if (layer.bias.length != want_b) {
            report(ErrorCode::SliceLengthMismatch, i,
                   "bias slice holds " + std::to_string(layer.bias.length) + " values, geometry needs " +
                       std::to_string(want_b));
        }
        for (const Slice* s : {&layer.weights, &layer.bias}) {
            if (s->length == 0) {
                continue;
            }
            const bool overflow = s->offset > std::numeric_limits<std::size_t>::max() - s->length;
            if (overflow || s->end() > param_count) {
                report(ErrorCode::SliceOutOfBounds, i,
                       "slice [" + std::to_string(s->offset) + ", +" + std::to_string(s->length) +
                           ") exceeds " + std::to_string(param_count) + " parameters");
                continue;
            }
            claims.push_back(Claim{*s, i});
        }
    }

    std::sort(claims.begin(), claims.end(),
              [](const Claim& a, const Claim& b) { return a.slice.offset < b.slice.offset; });
    std::size_t covered_to = 0;
    for (std::size_t k = 0; k < claims.size(); ++k) {
        const Claim& c = claims[k];
        if (k > 0 && c.slice.offset < covered_to) {
            report(ErrorCode::SliceOverlap, c.layer,
                   "slice at offset " + std::to_string(c.slice.offset) + " overlaps a slice of layer " +
                       std::to_string(claims[k - 1].layer));
        } else if (c.slice.offset > covered_to) {
            report(ErrorCode::SliceGap, c.layer,
                   "parameters [" + std::to_string(covered_to) + ", " + std::to_string(c.slice.offset) +
                       ") are not referenced by any layer");
        }
        covered_to = std::max(covered_to, c.slice.end());
    }
    if (covered_to < param_count) {
        report(ErrorCode::SliceGap, std::nullopt,
               "parameters [" + std::to_string(covered_to) + ", " + std::to_string(param_count) +
                   ") are not referenced by any layer");
    }

    if (network.input_shape.valid()) {
        TensorShape current = network.input_shape;
        for (std::size_t i = 0; i < network.layers.size(); ++i) {
            try {
                current = layer_output_shape(network.layers[i], current);
            } catch (const Error& e) {
                report(e.code(), i, e.diagnostics().front().message);
                return out;
            }
        }
        if (current.rank() != 1) {
            report(ErrorCode::ShapeMismatch, network.layers.size() - 1,
                   "network output must be a vector, got " + current.to_string());
        }
    }
    return out;
}

const TensorShape& Network::input_shape_of(std::size_t layer) const {
    return layer == 0 ? ir_.input_shape : shapes_.at(layer - 1);
}

std::span<const float> Network::weights(std::size_t layer) const {
    const Slice& s = ir_.layers.at(layer).weights;
    return std::span<const float>(ir_.parameters).subspan(s.offset, s.length);
}

std::span<const float> Network::bias(std::size_t layer) const {
    const Slice& s = ir_.layers.at(layer).bias;
    return std::span<const float>(ir_.parameters).subspan(s.offset, s.length);
}

Network validate(NetworkIR network) {
    auto findings = check(network);
    if (!findings.empty()) {
        throw Error(std::move(findings));
    }
    auto shapes = infer_shapes(network);
    return Network(std::move(network), std::move(shapes));
}

std::uint64_t count_connections(const NetworkIR& network) {
    std::uint64_t total = 0;
    for (const auto& layer : network.layers) {
        total += layer.weights.length + layer.bias.length;
    }
    return total;
}

NetworkBuilder::NetworkBuilder(std::string name, TensorShape input_shape) : shape_(input_shape) {
    ir_.name = std::move(name);
    ir_.input_shape = std::move(input_shape);
}

namespace {

void append_layer(NetworkIR& ir, TensorShape& shape, std::size_t& next_offset, LayerSpec layer) {
    TensorShape out;
    try {
        out = layer_output_shape(layer, shape);
    } catch (const Error& e) {
        throw shape_error(e.code(), ir.layers.size(), e.diagnostics().front().message);
    }
    layer.weights = Slice{next_offset, expected_weight_count(layer.geometry)};
    layer.bias = Slice{layer.weights.end(), expected_bias_count(layer.geometry)};
    next_offset = layer.bias.end();
    ir.layers.push_back(std::move(layer));
    shape = std::move(out);
}

} // namespace

NetworkBuilder& NetworkBuilder::dense(std::size_t units, Activation activation) {
    const std::size_t in = shape_.rank() == 1 ? shape_.dims[0] : 0;
    if (shape_.rank() != 1) {
        throw shape_error(ErrorCode::ShapeMismatch, ir_.layers.size(),
                          "dense layer needs a vector input, got " + shape_.to_string());
    }
    append_layer(ir_, shape_, next_offset_, LayerSpec{DenseGeometry{in, units}, activation, {}, {}});
    return *this;
}

NetworkBuilder& NetworkBuilder::conv2d(std::size_t filters, std::size_t kernel_h, std::size_t kernel_w,
                                       std::size_t stride_h, std::size_t stride_w, Activation activation) {
    if (shape_.rank() != 3) {
        throw shape_error(ErrorCode::ShapeMismatch, ir_.layers.size(),
                          "conv2d needs an (h, w, channels) input, got " + shape_.to_string());
    }
    Conv2dGeometry g{kernel_h, kernel_w, shape_.dims[2], filters, stride_h, stride_w};
    append_layer(ir_, shape_, next_offset_, LayerSpec{g, activation, {}, {}});
    return *this;
}

NetworkBuilder& NetworkBuilder::pool2d(PoolMode mode, std::size_t window_h, std::size_t window_w,
                                       std::size_t stride_h, std::size_t stride_w) {
    Pool2dGeometry g{mode, window_h, window_w, stride_h, stride_w};
    append_layer(ir_, shape_, next_offset_, LayerSpec{g, Activation::Linear, {}, {}});
    return *this;
}

NetworkBuilder& NetworkBuilder::flatten() {
    append_layer(ir_, shape_, next_offset_, LayerSpec{FlattenGeometry{}, Activation::Linear, {}, {}});
    return *this;
}

NetworkIR NetworkBuilder::build_ir(std::vector<float> parameters) const {
    NetworkIR ir = ir_;
    ir.parameters = std::move(parameters);
    return ir;
}

Network NetworkBuilder::build(std::vector<float> parameters) const {
    return validate(build_ir(std::move(parameters)));
}

} // namespace tpnn
