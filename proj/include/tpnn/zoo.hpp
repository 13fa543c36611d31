#pragma once

// Reference networks used by the fixtures, the tests and the acceptance run.

#include "tpnn/model_ir.hpp"

#include <cstdint>

namespace tpnn::zoo {

/// 2-2-1 ReLU network computing XOR exactly on {0,1}^2: 9 connections.
Network xor_network();

/// LeNet-5 stand-in on a 32x32x1 input (61,706 connections) with seeded
/// uniform weights in +-1/sqrt(fan_in).
Network lenet5(std::uint64_t seed);

/// 21-124-170-2 sigmoid MLP sized like the F1/10 steering network.
Network f1tenth_standin(std::uint64_t seed);

/// A single flatten layer over a 2x3x2 input: no parameters.
Network flatten_only();

} // namespace tpnn::zoo
