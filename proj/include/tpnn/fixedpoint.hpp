#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tpnn {

/// Signed Q16.16 fixed-point scalar: value = raw / 65536.
struct Fix16 {
    std::int32_t raw = 0;

    static constexpr Fix16 from_raw(std::int32_t r) noexcept { return Fix16{r}; }
    double to_double() const noexcept { return static_cast<double>(raw) / 65536.0; }

    friend constexpr bool operator==(Fix16, Fix16) = default;
    friend constexpr auto operator<=>(Fix16, Fix16) = default;
};

namespace fx {

inline constexpr std::int32_t kOne = 65536;
inline constexpr Fix16 kMax{std::numeric_limits<std::int32_t>::max()};
inline constexpr Fix16 kMin{std::numeric_limits<std::int32_t>::min()};

/// Activation lookup tables: 257 knots, evenly spaced, linear interpolation.
inline constexpr int kLutSize = 257;
/// Sigmoid knots cover [-8, 8] with a spacing of 1/16 (4096 raw).
inline constexpr std::int32_t kSigmoidRange = 8 * kOne;
inline constexpr int kSigmoidStepShift = 12;
/// Tanh knots cover [-4, 4] with a spacing of 1/32 (2048 raw).
inline constexpr std::int32_t kTanhRange = 4 * kOne;
inline constexpr int kTanhStepShift = 11;

using Lut = std::array<Fix16, kLutSize>;
using FloatLut = std::array<float, kLutSize>;

/// Saturates a 64-bit raw value into the Q16.16 range.
constexpr Fix16 saturate(std::int64_t raw) noexcept {
    if (raw > std::numeric_limits<std::int32_t>::max()) {
        return kMax;
    }
    if (raw < std::numeric_limits<std::int32_t>::min()) {
        return kMin;
    }
    return Fix16{static_cast<std::int32_t>(raw)};
}

/// Nearest representable value, ties away from zero; saturating. NaN maps to 0.
Fix16 from_real(double x) noexcept;

constexpr Fix16 add(Fix16 a, Fix16 b) noexcept {
    return saturate(static_cast<std::int64_t>(a.raw) + b.raw);
}

constexpr Fix16 sub(Fix16 a, Fix16 b) noexcept {
    return saturate(static_cast<std::int64_t>(a.raw) - b.raw);
}

/// (a * b + 2^15) >> 16 in 64 bits (round half up), then saturate.
constexpr Fix16 mul(Fix16 a, Fix16 b) noexcept {
    const std::int64_t product = static_cast<std::int64_t>(a.raw) * b.raw;
    return saturate((product + (std::int64_t{1} << 15)) >> 16);
}

constexpr Fix16 relu(Fix16 a) noexcept { return a.raw > 0 ? a : Fix16{0}; }

Fix16 sigmoid(Fix16 a) noexcept;
Fix16 tanh(Fix16 a) noexcept;

/// Knot values in Q16.16; these are what the generated runtime embeds.
const Lut& sigmoid_table();
const Lut& tanh_table();

/// Same knots in float32, used by float-mode activations.
const FloatLut& sigmoid_table_f();
const FloatLut& tanh_table_f();

/// Float-mode activations: the same LUT scheme evaluated in float32.
float sigmoid_f(float x) noexcept;
float tanh_f(float x) noexcept;
inline float relu_f(float x) noexcept { return x > 0.0f ? x : 0.0f; }

} // namespace fx
} // namespace tpnn
