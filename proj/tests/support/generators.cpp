#include "generators.hpp"

#include <algorithm>
#include <string>

namespace tpnn::testing {

Activation random_activation(Rng& rng) {
    static const std::vector<Activation> all = {Activation::Linear, Activation::Relu, Activation::Sigmoid,
                                                Activation::Tanh};
    return rng.pick(all);
}

std::vector<float> random_parameters(Rng& rng, std::size_t count, double limit) {
    std::vector<float> out(count);
    for (auto& v : out) {
        v = static_cast<float>(rng.uniform(-limit, limit));
    }
    return out;
}

std::vector<float> random_input(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<float> out(n);
    for (auto& v : out) {
        v = static_cast<float>(rng.uniform(lo, hi));
    }
    return out;
}

Network random_dense_network(Rng& rng, std::size_t max_neurons, std::size_t max_layers) {
    const std::size_t layers = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(max_layers)));
    // Every layer needs at least one neuron, the input included.
    std::size_t budget = max_neurons - (layers + 1);
    auto take = [&] {
        const std::size_t extra = static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(std::min<std::size_t>(budget, 6))));
        budget -= extra;
        return 1 + extra;
    };
    NetworkBuilder b("dense" + std::to_string(rng.bits() % 100000), TensorShape{{take()}});
    for (std::size_t k = 0; k < layers; ++k) {
        b.dense(take(), random_activation(rng));
    }
    return b.build(random_parameters(rng, b.parameter_count()));
}

namespace {

// Stride that makes (extent - window) divisible, favouring 1 and 2.
std::size_t fitting_stride(Rng& rng, std::size_t extent, std::size_t window) {
    const std::size_t span = extent - window;
    std::vector<std::size_t> options{1};
    for (std::size_t s = 2; s <= 3; ++s) {
        if (span % s == 0) {
            options.push_back(s);
        }
    }
    return rng.pick(options);
}

} // namespace

Network random_architecture(Rng& rng) {
    const std::string name = "arch" + std::to_string(rng.bits() % 100000);
    if (rng.between(0, 3) == 0) {
        NetworkBuilder b(name, TensorShape{{static_cast<std::size_t>(rng.between(1, 12))}});
        const auto layers = rng.between(1, 3);
        for (std::int64_t k = 0; k < layers; ++k) {
            b.dense(static_cast<std::size_t>(rng.between(1, 12)), random_activation(rng));
        }
        return b.build(random_parameters(rng, b.parameter_count()));
    }

    const auto h = static_cast<std::size_t>(rng.between(3, 10));
    const auto w = static_cast<std::size_t>(rng.between(3, 10));
    const auto c = static_cast<std::size_t>(rng.between(1, 3));
    NetworkBuilder b(name, TensorShape{{h, w, c}});
    const auto blocks = rng.between(1, 3);
    for (std::int64_t k = 0; k < blocks; ++k) {
        const auto& shape = b.current_shape().dims;
        const std::size_t kh = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(std::min<std::size_t>(shape[0], 3))));
        const std::size_t kw = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(std::min<std::size_t>(shape[1], 3))));
        const std::size_t sh = fitting_stride(rng, shape[0], kh);
        const std::size_t sw = fitting_stride(rng, shape[1], kw);
        switch (rng.between(0, 2)) {
        case 0:
            b.conv2d(static_cast<std::size_t>(rng.between(1, 4)), kh, kw, sh, sw, random_activation(rng));
            break;
        case 1: b.pool2d(PoolMode::Average, kh, kw, sh, sw); break;
        default: b.pool2d(PoolMode::Max, kh, kw, sh, sw); break;
        }
    }
    b.flatten();
    const auto dense_layers = rng.between(0, 2);
    for (std::int64_t k = 0; k < dense_layers; ++k) {
        b.dense(static_cast<std::size_t>(rng.between(1, 8)), random_activation(rng));
    }
    return b.build(random_parameters(rng, b.parameter_count()));
}

} // namespace tpnn::testing
