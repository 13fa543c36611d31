#include "tpnn/fixedpoint.hpp"

#include <cmath>

namespace tpnn::fx {

Fix16 from_real(double x) noexcept {
    if (std::isnan(x)) {
        return Fix16{0};
    }
    const double scaled = std::round(x * 65536.0);
    if (scaled >= 2147483647.0) {
        return kMax;
    }
    if (scaled <= -2147483648.0) {
        return kMin;
    }
    return Fix16{static_cast<std::int32_t>(scaled)};
}

namespace {

template <class F>
Lut make_table(double range, F&& f) {
    Lut lut{};
    const double step = 2.0 * range / (kLutSize - 1);
    for (int k = 0; k < kLutSize; ++k) {
        lut[k] = from_real(f(-range + step * k));
    }
    return lut;
}

template <class F>
FloatLut make_float_table(double range, F&& f) {
    FloatLut lut{};
    const double step = 2.0 * range / (kLutSize - 1);
    for (int k = 0; k < kLutSize; ++k) {
        lut[k] = static_cast<float>(f(-range + step * k));
    }
    return lut;
}

double sigmoid_exact(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double tanh_exact(double x) { return std::tanh(x); }

Fix16 interpolate(const Lut& lut, Fix16 a, std::int32_t range, int shift) noexcept {
    const std::int64_t offset = static_cast<std::int64_t>(a.raw) + range;
    const std::int64_t idx = offset >> shift;
    if (idx >= kLutSize - 1) {
        return lut[kLutSize - 1];
    }
    const std::int64_t frac = offset & ((std::int64_t{1} << shift) - 1);
    const std::int64_t lo = lut[idx].raw;
    const std::int64_t hi = lut[idx + 1].raw;
    const std::int64_t half = std::int64_t{1} << (shift - 1);
    return Fix16{static_cast<std::int32_t>(lo + (((hi - lo) * frac + half) >> shift))};
}

float interpolate_f(const FloatLut& lut, float x, float range, float scale) noexcept {
    const float t = (x + range) * scale;
    const int idx = static_cast<int>(t);
    if (idx >= kLutSize - 1) {
        return lut[kLutSize - 1];
    }
    const float frac = t - static_cast<float>(idx);
    return lut[idx] + (lut[idx + 1] - lut[idx]) * frac;
}

} // namespace

const Lut& sigmoid_table() {
    static const Lut table = make_table(8.0, sigmoid_exact);
    return table;
}

const Lut& tanh_table() {
    static const Lut table = make_table(4.0, tanh_exact);
    return table;
}

const FloatLut& sigmoid_table_f() {
    static const FloatLut table = make_float_table(8.0, sigmoid_exact);
    return table;
}

const FloatLut& tanh_table_f() {
    static const FloatLut table = make_float_table(4.0, tanh_exact);
    return table;
}

Fix16 sigmoid(Fix16 a) noexcept {
    if (a.raw < -kSigmoidRange) {
        return Fix16{0};
    }
    if (a.raw > kSigmoidRange) {
        return Fix16{kOne};
    }
    return interpolate(sigmoid_table(), a, kSigmoidRange, kSigmoidStepShift);
}

Fix16 tanh(Fix16 a) noexcept {
    if (a.raw < -kTanhRange) {
        return Fix16{-kOne};
    }
    if (a.raw > kTanhRange) {
        return Fix16{kOne};
    }
    return interpolate(tanh_table(), a, kTanhRange, kTanhStepShift);
}

float sigmoid_f(float x) noexcept {
    // The negated comparison routes NaN to the lower asymptote.
    if (!(x > -8.0f)) {
        return 0.0f;
    }
    if (x >= 8.0f) {
        return 1.0f;
    }
    return interpolate_f(sigmoid_table_f(), x, 8.0f, 16.0f);
}

float tanh_f(float x) noexcept {
    if (!(x > -4.0f)) {
        return -1.0f;
    }
    if (x >= 4.0f) {
        return 1.0f;
    }
    return interpolate_f(tanh_table_f(), x, 4.0f, 32.0f);
}

} // namespace tpnn::fx
