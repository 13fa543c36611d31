#include "tpnn/interpreter.hpp"

#include <algorithm>

namespace tpnn {

std::string_view to_string(NumericMode mode) {
    return mode == NumericMode::Float32 ? "float32" : "fix16";
}

float pool_reciprocal_f(std::size_t window_elements) noexcept {
    return static_cast<float>(1.0 / static_cast<double>(window_elements));
}

Fix16 pool_reciprocal(std::size_t window_elements) noexcept {
    return fx::from_real(1.0 / static_cast<double>(window_elements));
}

std::vector<Fix16> to_fix16(std::span<const float> values) {
    std::vector<Fix16> out;
    out.reserve(values.size());
    for (float v : values) {
        out.push_back(fx::from_real(static_cast<double>(v)));
    }
    return out;
}

namespace {

// Scalar semantics per numeric mode. The generated C mirrors these exactly.
struct FloatOps {
    using T = float;
    static T mac(T acc, T a, T b) noexcept { return acc + a * b; }
    static T add(T a, T b) noexcept { return a + b; }
    static T mul(T a, T b) noexcept { return a * b; }
    static T reciprocal(std::size_t n) noexcept { return pool_reciprocal_f(n); }
    static T activate(Activation f, T x) noexcept {
        switch (f) {
        case Activation::Relu: return fx::relu_f(x);
        case Activation::Sigmoid: return fx::sigmoid_f(x);
        case Activation::Tanh: return fx::tanh_f(x);
        case Activation::Linear: break;
        }
        return x;
    }
};

struct FixOps {
    using T = Fix16;
    static T mac(T acc, T a, T b) noexcept { return fx::add(acc, fx::mul(a, b)); }
    static T add(T a, T b) noexcept { return fx::add(a, b); }
    static T mul(T a, T b) noexcept { return fx::mul(a, b); }
    static T reciprocal(std::size_t n) noexcept { return pool_reciprocal(n); }
    static T activate(Activation f, T x) noexcept {
        switch (f) {
        case Activation::Relu: return fx::relu(x);
        case Activation::Sigmoid: return fx::sigmoid(x);
        case Activation::Tanh: return fx::tanh(x);
        case Activation::Linear: break;
        }
        return x;
    }
};

template <class T>
struct OpsFor;
template <>
struct OpsFor<float> {
    using type = FloatOps;
};
template <>
struct OpsFor<Fix16> {
    using type = FixOps;
};

template <class Ops, class T = typename Ops::T>
void dense(const DenseGeometry& g, Activation f, std::span<const T> in, std::span<const T> w,
           std::span<const T> b, std::span<T> out, RunCounters& counters) {
    for (std::size_t j = 0; j < g.out_count; ++j) {
        T acc = b[j];
        for (std::size_t i = 0; i < g.in_count; ++i) {
            acc = Ops::mac(acc, in[i], w[i * g.out_count + j]);
            ++counters.macs;
        }
        out[j] = Ops::activate(f, acc);
        ++counters.activation_evals;
    }
}

template <class Ops, class T = typename Ops::T>
void conv2d(const Conv2dGeometry& g, Activation f, const TensorShape& in_shape,
            const TensorShape& out_shape, std::span<const T> in, std::span<const T> w,
            std::span<const T> b, std::span<T> out, RunCounters& counters) {
    const std::size_t in_w = in_shape.dims[1];
    const std::size_t in_c = in_shape.dims[2];
    const std::size_t out_h = out_shape.dims[0];
    const std::size_t out_w = out_shape.dims[1];
    const std::size_t out_c = g.out_channels;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            for (std::size_t oc = 0; oc < out_c; ++oc) {
                T acc = b[oc];
                for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
                    for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
                        const std::size_t row = oy * g.stride_h + ky;
                        const std::size_t col = ox * g.stride_w + kx;
                        for (std::size_t ic = 0; ic < in_c; ++ic) {
                            acc = Ops::mac(acc, in[(row * in_w + col) * in_c + ic],
                                           w[((ky * g.kernel_w + kx) * in_c + ic) * out_c + oc]);
                            ++counters.macs;
                        }
                    }
                }
                out[(oy * out_w + ox) * out_c + oc] = Ops::activate(f, acc);
                ++counters.activation_evals;
            }
        }
    }
}

template <class Ops, class T = typename Ops::T>
void pool2d(const Pool2dGeometry& g, const TensorShape& in_shape, const TensorShape& out_shape,
            std::span<const T> in, std::span<T> out) {
    const std::size_t in_w = in_shape.dims[1];
    const std::size_t channels = in_shape.dims[2];
    const T recip = Ops::reciprocal(g.window_h * g.window_w);
    for (std::size_t oy = 0; oy < out_shape.dims[0]; ++oy) {
        for (std::size_t ox = 0; ox < out_shape.dims[1]; ++ox) {
            for (std::size_t c = 0; c < channels; ++c) {
                auto at = [&](std::size_t ky, std::size_t kx) {
                    return in[((oy * g.stride_h + ky) * in_w + (ox * g.stride_w + kx)) * channels + c];
                };
                T result = at(0, 0);
                if (g.mode == PoolMode::Max) {
                    for (std::size_t ky = 0; ky < g.window_h; ++ky) {
                        for (std::size_t kx = 0; kx < g.window_w; ++kx) {
                            const T v = at(ky, kx);
                            if (v > result) {
                                result = v;
                            }
                        }
                    }
                } else {
                    T sum{};
                    for (std::size_t ky = 0; ky < g.window_h; ++ky) {
                        for (std::size_t kx = 0; kx < g.window_w; ++kx) {
                            sum = Ops::add(sum, at(ky, kx));
                        }
                    }
                    result = Ops::mul(sum, recip);
                }
                out[(oy * out_shape.dims[1] + ox) * channels + c] = result;
            }
        }
    }
}

} // namespace

Interpreter::Interpreter(const Network& network, NumericMode mode) : network_(&network), mode_(mode) {
    const auto& shapes = network.shapes();
    if (mode == NumericMode::Float32) {
        float_buffers_.reserve(shapes.size());
        for (const auto& s : shapes) {
            float_buffers_.emplace_back(s.element_count());
        }
    } else {
        fix_buffers_.reserve(shapes.size());
        for (const auto& s : shapes) {
            fix_buffers_.emplace_back(s.element_count());
        }
        fix_params_ = to_fix16(network.parameters());
    }
}

template <class T>
void Interpreter::forward(std::span<const T> input, std::vector<std::vector<T>>& buffers,
                          const std::vector<T>& params) {
    using Ops = typename OpsFor<T>::type;
    const Network& net = *network_;
    if (input.size() != net.input_size()) {
        throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(input.size()) +
                                                  " values, network expects " +
                                                  std::to_string(net.input_size()));
    }
    counters_ = {};
    std::span<const T> current = input;
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        const LayerSpec& layer = net.layers()[i];
        std::span<T> out(buffers[i]);
        const std::span<const T> all(params);
        const auto w = all.subspan(layer.weights.offset, layer.weights.length);
        const auto b = all.subspan(layer.bias.offset, layer.bias.length);
        const TensorShape& in_shape = net.input_shape_of(i);
        const TensorShape& out_shape = net.shapes()[i];
        if (const auto* d = std::get_if<DenseGeometry>(&layer.geometry)) {
            dense<Ops>(*d, layer.activation, current, w, b, out, counters_);
        } else if (const auto* c = std::get_if<Conv2dGeometry>(&layer.geometry)) {
            conv2d<Ops>(*c, layer.activation, in_shape, out_shape, current, w, b, out, counters_);
        } else if (const auto* p = std::get_if<Pool2dGeometry>(&layer.geometry)) {
            pool2d<Ops>(*p, in_shape, out_shape, current, out);
        } else {
            std::copy(current.begin(), current.end(), out.begin());
        }
        current = out;
    }
}

std::vector<float> Interpreter::run(std::span<const float> input) {
    if (mode_ != NumericMode::Float32) {
        throw Error(ErrorCode::ModeMismatch, "float32 input given to a fix16 interpreter");
    }
    forward<float>(input, float_buffers_, network_->parameters());
    return float_buffers_.back();
}

std::vector<Fix16> Interpreter::run(std::span<const Fix16> input) {
    if (mode_ != NumericMode::Fix16) {
        throw Error(ErrorCode::ModeMismatch, "fix16 input given to a float32 interpreter");
    }
    forward<Fix16>(input, fix_buffers_, fix_params_);
    return fix_buffers_.back();
}

namespace {

template <class T>
std::vector<std::vector<T>> run_all(const Network& network, NumericMode mode,
                                    std::span<const std::vector<T>> inputs) {
    std::vector<std::vector<T>> outputs;
    if (inputs.empty()) {
        return outputs;
    }
    Interpreter interp(network, mode);
    outputs.reserve(inputs.size());
    for (const auto& in : inputs) {
        outputs.push_back(interp.run(std::span<const T>(in)));
    }
    return outputs;
}

} // namespace

std::vector<std::vector<float>> run_batch(const Network& network,
                                          std::span<const std::vector<float>> inputs) {
    return run_all<float>(network, NumericMode::Float32, inputs);
}

std::vector<std::vector<Fix16>> run_batch(const Network& network,
                                          std::span<const std::vector<Fix16>> inputs) {
    return run_all<Fix16>(network, NumericMode::Fix16, inputs);
}

} // namespace tpnn
