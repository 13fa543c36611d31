#pragma once

// Reference computations written independently of the library code they
// check. Where the library's definitions are normative (the activation
// tables) the oracles call into the library and say so.

#include "tpnn/model_ir.hpp"

#include <cstdint>
#include <vector>

namespace tpnn::testing::oracle {

// Q16.16 arithmetic restated with floor division and clamping instead of
// shifts and the library's saturate().
std::int32_t clamp_raw(long double exact);
std::int32_t fx_add(std::int32_t a, std::int32_t b);
std::int32_t fx_sub(std::int32_t a, std::int32_t b);
std::int32_t fx_mul(std::int32_t a, std::int32_t b);
std::int32_t fx_from_real(double x);

/// Explicit connection list of a dense-only network: every (source neuron,
/// destination neuron, weight) triple, neurons numbered globally with the
/// inputs first. Sorted by destination layer, then source, then destination.
struct Connection {
    std::size_t from;
    std::size_t to;
    float weight;
};

struct ConnectionSet {
    std::size_t neuron_count = 0;
    std::vector<std::size_t> layer_begin; // first neuron of each layer; inputs are layer 0
    std::vector<Activation> activation;   // per non-input layer
    std::vector<float> bias;              // per neuron (inputs: unused)
    std::vector<Connection> connections;
};

ConnectionSet connection_set(const Network& dense_network);

/// Evaluates the connection set neuron by neuron, scanning the whole
/// connection list for each destination (no matrix indexing).
std::vector<float> run_float(const ConnectionSet& set, const std::vector<float>& input);
std::vector<std::int32_t> run_fix16(const ConnectionSet& set, const std::vector<std::int32_t>& input);

} // namespace tpnn::testing::oracle
