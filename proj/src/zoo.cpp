#include "tpnn/zoo.hpp"

#include <cmath>
#include <random>

namespace tpnn::zoo {

namespace {

// Fan-in scaled uniform initialization, layer by layer in parameter order.
std::vector<float> seeded_parameters(const NetworkIR& ir, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<float> params(ir.parameters.size());
    for (const auto& layer : ir.layers) {
        const std::size_t bias = layer.bias.length == 0 ? 1 : layer.bias.length;
        const std::size_t fan_in = layer.weights.length / bias;
        const double limit = fan_in == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (std::size_t i = 0; i < layer.weights.length; ++i) {
            params[layer.weights.offset + i] = static_cast<float>(dist(rng));
        }
        for (std::size_t i = 0; i < layer.bias.length; ++i) {
            params[layer.bias.offset + i] = static_cast<float>(dist(rng) * 0.1);
        }
    }
    return params;
}

Network seeded(const NetworkBuilder& builder, std::uint64_t seed) {
    NetworkIR ir = builder.build_ir(std::vector<float>(builder.parameter_count()));
    ir.parameters = seeded_parameters(ir, seed);
    return validate(std::move(ir));
}

} // namespace

Network xor_network() {
    NetworkBuilder b("xor", TensorShape{{2}});
    b.dense(2, Activation::Relu).dense(1, Activation::Linear);
    return b.build({1.0f, 1.0f, 1.0f, 1.0f, 0.0f, -1.0f, 1.0f, -2.0f, 0.0f});
}

Network lenet5(std::uint64_t seed) {
    NetworkBuilder b("lenet5", TensorShape{{32, 32, 1}});
    b.conv2d(6, 5, 5, 1, 1, Activation::Tanh)
        .pool2d(PoolMode::Average, 2, 2, 2, 2)
        .conv2d(16, 5, 5, 1, 1, Activation::Tanh)
        .pool2d(PoolMode::Average, 2, 2, 2, 2)
        .flatten()
        .dense(120, Activation::Tanh)
        .dense(84, Activation::Tanh)
        .dense(10, Activation::Linear);
    return seeded(b, seed);
}

Network f1tenth_standin(std::uint64_t seed) {
    NetworkBuilder b("f1tenth", TensorShape{{21}});
    b.dense(124, Activation::Sigmoid).dense(170, Activation::Sigmoid).dense(2, Activation::Linear);
    return seeded(b, seed);
}

Network flatten_only() {
    NetworkBuilder b("flat", TensorShape{{2, 3, 2}});
    b.flatten();
    return b.build({});
}

} // namespace tpnn::zoo
