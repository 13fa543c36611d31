#pragma once

#include "tpnn/fixedpoint.hpp"
#include "tpnn/model_ir.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tpnn {

enum class NumericMode { Float32, Fix16 };

std::string_view to_string(NumericMode mode);

/// Operation counts observed during the most recent run.
struct RunCounters {
    std::uint64_t macs = 0;
    std::uint64_t activation_evals = 0;
};

/// Run context: a network plus activation buffers preallocated from its
/// shapes and, in fix16 mode, the parameters converted once to Q16.16.
///
/// Dense: out_j = f(b_j + sum_i in_i * w_ij), summed in ascending i.
/// Conv2d: valid cross-correlation accumulated over (kh, kw, in_ch) ascending.
/// Average pooling multiplies the window sum by a precomputed reciprocal.
///
/// Not thread-safe; use one Interpreter per thread. The network must
/// outlive the interpreter.
class Interpreter {
public:
    Interpreter(const Network& network, NumericMode mode);

    NumericMode mode() const noexcept { return mode_; }
    const Network& network() const noexcept { return *network_; }

    /// Float32 mode only; throws ModeMismatch otherwise.
    std::vector<float> run(std::span<const float> input);
    /// Fix16 mode only; throws ModeMismatch otherwise.
    std::vector<Fix16> run(std::span<const Fix16> input);

    const RunCounters& counters() const noexcept { return counters_; }

private:
    template <class T>
    void forward(std::span<const T> input, std::vector<std::vector<T>>& buffers,
                 const std::vector<T>& params);

    const Network* network_;
    NumericMode mode_;
    std::vector<std::vector<float>> float_buffers_;
    std::vector<std::vector<Fix16>> fix_buffers_;
    std::vector<Fix16> fix_params_;
    RunCounters counters_;
};

std::vector<std::vector<float>> run_batch(const Network& network,
                                          std::span<const std::vector<float>> inputs);
std::vector<std::vector<Fix16>> run_batch(const Network& network,
                                          std::span<const std::vector<Fix16>> inputs);

/// Reciprocal of a pooling window as used by both the interpreter and the
/// generated code.
float pool_reciprocal_f(std::size_t window_elements) noexcept;
Fix16 pool_reciprocal(std::size_t window_elements) noexcept;

/// Converts every parameter with fx::from_real.
std::vector<Fix16> to_fix16(std::span<const float> values);

} // namespace tpnn
