#include "generators.hpp"
#include "oracles.hpp"

#include "tpnn/analyzer.hpp"
#include "tpnn/interpreter.hpp"
#include "tpnn/zoo.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>

using namespace tpnn;
using tpnn::testing::Rng;

namespace {

std::vector<Fix16> fix_input(std::initializer_list<double> values) {
    std::vector<Fix16> out;
    for (double v : values) out.push_back(fx::from_real(v));
    return out;
}

std::vector<Fix16> to_fix(const std::vector<float>& v) {
    std::vector<Fix16> out;
    for (float x : v) out.push_back(fx::from_real(x));
    return out;
}

// Distance in units in the last place between two finite floats.
std::uint64_t ulp_distance(float a, float b) {
    auto key = [](float f) {
        const auto bits = std::bit_cast<std::int32_t>(f);
        return bits < 0 ? std::int64_t{std::numeric_limits<std::int32_t>::min()} - bits : std::int64_t{bits};
    };
    const std::int64_t d = key(a) - key(b);
    return static_cast<std::uint64_t>(d < 0 ? -d : d);
}

} // namespace

TEST_CASE("XOR truth table") {
    const Network net = zoo::xor_network();
    const double expected[4] = {0, 1, 1, 0};
    const double inputs[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    Interpreter fixed(net, NumericMode::Fix16);
    Interpreter real(net, NumericMode::Float32);
    for (int k = 0; k < 4; ++k) {
        const auto q = fixed.run(fix_input({inputs[k][0], inputs[k][1]}));
        REQUIRE(q.size() == 1);
        CHECK(q[0].raw == static_cast<std::int32_t>(expected[k] * 65536));
        const std::vector<float> x{static_cast<float>(inputs[k][0]), static_cast<float>(inputs[k][1])};
        const auto f = real.run(x);
        CHECK(f[0] == static_cast<float>(expected[k]));
    }
}

TEST_CASE("trivial networks") {
    SUBCASE("all-zero parameters give zero output") {
        NetworkBuilder b("zero", TensorShape{{3}});
        b.dense(4, Activation::Relu).dense(2, Activation::Linear);
        const Network net = b.build(std::vector<float>(b.parameter_count(), 0.0f));
        Interpreter fixed(net, NumericMode::Fix16);
        for (const auto v : fixed.run(fix_input({0.25, -3, 7}))) CHECK(v.raw == 0);
        Interpreter real(net, NumericMode::Float32);
        for (const auto v : real.run(std::vector<float>{0.25f, -3, 7})) CHECK(v == 0.0f);
    }
    SUBCASE("1->1 identity") {
        NetworkBuilder b("id", TensorShape{{1}});
        b.dense(1, Activation::Linear);
        const Network net = b.build({1.0f, 0.0f});
        Interpreter fixed(net, NumericMode::Fix16);
        for (std::int32_t raw : {0, 1, -1, 65536, -123456, 0x7fffffff, std::numeric_limits<std::int32_t>::min()}) {
            const std::vector<Fix16> x{Fix16::from_raw(raw)};
            CHECK(fixed.run(x)[0].raw == raw);
        }
    }
    SUBCASE("float accumulation stays in single precision") {
        // 1 + 2^-24 + 2^-24 rounds back to 1 at each float step; a double
        // accumulator would keep 1 + 2^-23.
        NetworkBuilder b("acc", TensorShape{{2}});
        b.dense(1, Activation::Linear);
        const float tiny = std::ldexp(1.0f, -24);
        const Network net = b.build({tiny, tiny, 1.0f});
        Interpreter real(net, NumericMode::Float32);
        CHECK(real.run(std::vector<float>{1, 1})[0] == 1.0f);
    }
}

TEST_CASE("errors") {
    const Network net = zoo::xor_network();
    Interpreter fixed(net, NumericMode::Fix16);
    Interpreter real(net, NumericMode::Float32);
    const std::vector<float> xf{0, 1};
    const std::vector<Fix16> xq = to_fix(xf);
    try {
        fixed.run(xf);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ModeMismatch);
    }
    try {
        real.run(xq);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ModeMismatch);
    }
    try {
        real.run(std::vector<float>{1, 2, 3});
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
    try {
        fixed.run(std::vector<Fix16>{});
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
}

TEST_CASE("run_batch") {
    const Network net = zoo::xor_network();
    const std::vector<std::vector<float>> xs{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    SUBCASE("map law") {
        const auto batch = run_batch(net, xs);
        REQUIRE(batch.size() == 4);
        Interpreter real(net, NumericMode::Float32);
        for (std::size_t k = 0; k < xs.size(); ++k) CHECK(batch[k] == real.run(xs[k]));

        std::vector<std::vector<Fix16>> qs;
        for (const auto& x : xs) qs.push_back(to_fix(x));
        const auto qbatch = run_batch(net, qs);
        Interpreter fixed(net, NumericMode::Fix16);
        for (std::size_t k = 0; k < qs.size(); ++k) CHECK(qbatch[k] == fixed.run(qs[k]));
    }
    SUBCASE("empty batch") {
        CHECK(run_batch(net, std::vector<std::vector<float>>{}).empty());
        CHECK(run_batch(net, std::vector<std::vector<Fix16>>{}).empty());
    }
    SUBCASE("repeated input") {
        const std::vector<std::vector<float>> same(5, std::vector<float>{0.3f, 0.9f});
        const auto out = run_batch(net, same);
        for (const auto& o : out) CHECK(o == out[0]);
    }
}

TEST_CASE("property: run(x); run(y); run(x) repeats bit-for-bit") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const Network net = testing::random_architecture(rng);
        const auto x = testing::random_input(rng, net.input_size());
        const auto y = testing::random_input(rng, net.input_size(), -4, 4);
        Interpreter real(net, NumericMode::Float32);
        const auto first = real.run(x);
        real.run(y);
        const auto third = real.run(x);
        REQUIRE(first.size() == third.size());
        for (std::size_t k = 0; k < first.size(); ++k) {
            CHECK(std::bit_cast<std::uint32_t>(first[k]) == std::bit_cast<std::uint32_t>(third[k]));
        }
        Interpreter fixed(net, NumericMode::Fix16);
        const auto qa = fixed.run(to_fix(x));
        fixed.run(to_fix(y));
        CHECK(fixed.run(to_fix(x)) == qa);
    }
}

TEST_CASE("property: dense networks agree with the connection-set oracle") {
    Rng rng(20240611);
    for (int trial = 0; trial < 200; ++trial) {
        const Network net = testing::random_dense_network(rng, 20, 4);
        const auto set = testing::oracle::connection_set(net);
        Interpreter real(net, NumericMode::Float32);
        Interpreter fixed(net, NumericMode::Fix16);
        for (int v = 0; v < 5; ++v) {
            const auto x = testing::random_input(rng, net.input_size(), -2, 2);
            const auto got = real.run(x);
            const auto want = testing::oracle::run_float(set, x);
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(ulp_distance(got[k], want[k]) <= 4);
            }
            std::vector<std::int32_t> xr;
            for (const auto q : to_fix(x)) xr.push_back(q.raw);
            const auto qgot = fixed.run(to_fix(x));
            const auto qwant = testing::oracle::run_fix16(set, xr);
            for (std::size_t k = 0; k < qgot.size(); ++k) CHECK(qgot[k].raw == qwant[k]);
        }
    }
}

TEST_CASE("hand-worked conv and pool") {
    // 3x3x1 input holding 1..9 row-major.
    std::vector<float> grid;
    for (int k = 1; k <= 9; ++k) grid.push_back(static_cast<float>(k));

    SUBCASE("conv 2x2, kernel [1 2; 0 -1], bias 0.5") {
        NetworkBuilder b("conv", TensorShape{{3, 3, 1}});
        b.conv2d(1, 2, 2, 1, 1, Activation::Linear).flatten();
        const Network net = b.build({1, 2, 0, -1, 0.5f});
        // out(y,x) = v + 2(v+1) - (v+4) = 2v - 2 with v = in(y,x)
        const std::vector<float> want{0.5f, 2.5f, 6.5f, 8.5f};
        CHECK(Interpreter(net, NumericMode::Float32).run(grid) == want);
        CHECK(Interpreter(net, NumericMode::Fix16).run(to_fix(grid)) == to_fix(want));
    }
    SUBCASE("strided conv, two filters") {
        NetworkBuilder b("conv2", TensorShape{{3, 3, 1}});
        b.conv2d(2, 1, 1, 2, 2, Activation::Relu).flatten();
        // filter 0 doubles, filter 1 negates (then relu clamps to 0)
        const Network net = b.build({2, -1, 0, 0});
        const std::vector<float> want{2, 0, 6, 0, 14, 0, 18, 0};
        CHECK(Interpreter(net, NumericMode::Float32).run(grid) == want);
        CHECK(Interpreter(net, NumericMode::Fix16).run(to_fix(grid)) == to_fix(want));
    }
    SUBCASE("max and average pool 2x2 stride 1") {
        NetworkBuilder mb("max", TensorShape{{3, 3, 1}});
        mb.pool2d(PoolMode::Max, 2, 2, 1, 1).flatten();
        const Network maxnet = mb.build({});
        CHECK(Interpreter(maxnet, NumericMode::Float32).run(grid) == std::vector<float>{5, 6, 8, 9});
        CHECK(Interpreter(maxnet, NumericMode::Fix16).run(to_fix(grid)) == to_fix({5, 6, 8, 9}));

        NetworkBuilder ab("avg", TensorShape{{3, 3, 1}});
        ab.pool2d(PoolMode::Average, 2, 2, 1, 1).flatten();
        const Network avgnet = ab.build({});
        CHECK(Interpreter(avgnet, NumericMode::Float32).run(grid) == std::vector<float>{3, 4, 6, 7});
        CHECK(Interpreter(avgnet, NumericMode::Fix16).run(to_fix(grid)) == to_fix({3, 4, 6, 7}));
    }
    SUBCASE("pooling keeps channels apart") {
        NetworkBuilder b("chan", TensorShape{{2, 2, 2}});
        b.pool2d(PoolMode::Average, 2, 2, 1, 1).flatten();
        const Network net = b.build({});
        // channel 0: 1 2 3 4, channel 1: -8 -8 0 0
        const std::vector<float> x{1, -8, 2, -8, 3, 0, 4, 0};
        CHECK(Interpreter(net, NumericMode::Float32).run(x) == std::vector<float>{2.5f, -4});
        CHECK(Interpreter(net, NumericMode::Fix16).run(to_fix(x)) == to_fix({2.5f, -4}));
    }
}

TEST_CASE("property: instrumented counts match the cost model") {
    Rng rng(31337);
    std::vector<Network> nets{zoo::xor_network(), zoo::lenet5(1), zoo::f1tenth_standin(2), zoo::flatten_only()};
    for (int k = 0; k < 100; ++k) nets.push_back(testing::random_architecture(rng));
    for (const auto& net : nets) {
        const CostReport cost = cost_model(net);
        for (const auto mode : {NumericMode::Float32, NumericMode::Fix16}) {
            Interpreter interp(net, mode);
            const auto x = testing::random_input(rng, net.input_size());
            if (mode == NumericMode::Float32) {
                interp.run(x);
            } else {
                interp.run(to_fix(x));
            }
            CHECK(interp.counters().macs == cost.totals.macs);
            CHECK(interp.counters().activation_evals == cost.totals.activation_evals);
        }
    }
}

namespace {

// Error analysis for one activation kind: the ideal reference is the
// piecewise-linear interpolant P of the exact function through the knots,
// replaced by the asymptote outside the open interval (-range, range).
struct ActivationBounds {
    long double lipschitz = 1;  // max slope of P
    long double jump = 0;       // total discontinuity at the two clamps
    long double fix_error = 0;  // max |fix16 implementation - reference| (exhaustive)
    long double float_error = 0; // derived bound for the float implementation
};

struct Interpolant {
    double range;
    double low;
    std::vector<long double> knots;

    long double operator()(long double x) const {
        if (!(x > -range)) return low;
        if (x >= range) return 1;
        const long double step = 2.0L * range / (fx::kLutSize - 1);
        const long double t = (x + range) / step;
        const auto idx = static_cast<std::size_t>(t);
        if (idx >= knots.size() - 1) return knots.back();
        return knots[idx] + (knots[idx + 1] - knots[idx]) * (t - idx);
    }
};

Interpolant make_interpolant(Activation a) {
    Interpolant p;
    p.range = a == Activation::Sigmoid ? 8.0 : 4.0;
    p.low = a == Activation::Sigmoid ? 0.0 : -1.0;
    const long double step = 2.0L * p.range / (fx::kLutSize - 1);
    for (int k = 0; k < fx::kLutSize; ++k) {
        const long double x = -p.range + step * k;
        p.knots.push_back(a == Activation::Sigmoid ? 1.0L / (1.0L + std::exp(-x)) : std::tanh(x));
    }
    return p;
}

ActivationBounds measure_bounds(Activation a) {
    ActivationBounds b;
    if (a == Activation::Linear || a == Activation::Relu) {
        return b;
    }
    const Interpolant p = make_interpolant(a);
    const long double step = 2.0L * p.range / (fx::kLutSize - 1);
    b.lipschitz = 0;
    for (std::size_t k = 0; k + 1 < p.knots.size(); ++k) {
        b.lipschitz = std::max(b.lipschitz, std::fabs(p.knots[k + 1] - p.knots[k]) / step);
    }
    b.jump = std::fabs(p.knots.front() - p.low) + std::fabs(1.0L - p.knots.back());

    const std::int32_t r = static_cast<std::int32_t>(p.range * 65536);
    for (std::int32_t raw = -r - 4; raw <= r + 4; ++raw) {
        const Fix16 y = a == Activation::Sigmoid ? fx::sigmoid(Fix16{raw}) : fx::tanh(Fix16{raw});
        b.fix_error = std::max(b.fix_error, std::fabs(y.to_double() - p(raw / 65536.0L)));
    }

    // Float evaluation: t = (x + range) * scale rounds once in the add
    // (the scale is a power of two), moving t by at most u * 2 * range *
    // scale and the result by lipschitz * 2 * range * u. The knots are
    // rounded to float (u each, values within [-1, 1]) and the
    // interpolation itself rounds three times on values of magnitude <= 2.
    const long double u = std::ldexp(1.0L, -24);
    b.float_error = b.lipschitz * 2 * p.range * u + u + 3 * 2 * u;
    return b;
}

const ActivationBounds& bounds_for(Activation a) {
    static const ActivationBounds table[4] = {measure_bounds(Activation::Linear), measure_bounds(Activation::Relu),
                                              measure_bounds(Activation::Sigmoid), measure_bounds(Activation::Tanh)};
    return table[static_cast<int>(a)];
}

long double reference_activation(Activation a, long double z) {
    static const Interpolant sig = make_interpolant(Activation::Sigmoid);
    static const Interpolant th = make_interpolant(Activation::Tanh);
    switch (a) {
    case Activation::Linear: return z;
    case Activation::Relu: return z > 0 ? z : 0;
    case Activation::Sigmoid: return sig(z);
    case Activation::Tanh: return th(z);
    }
    return z;
}

long double gamma(std::size_t n) {
    const long double u = std::ldexp(1.0L, -24);
    return n * u / (1 - n * u);
}

// Runs the exact reference alongside two error vectors (fix16 vs
// reference, float vs reference) and returns the per-output budget
// |fix16 - float| <= e_fix + e_float.
std::vector<long double> agreement_budget(const Network& net, const std::vector<float>& input) {
    const long double q = std::ldexp(1.0L, -17); // half a Q16.16 step
    std::vector<long double> x(input.begin(), input.end());
    std::vector<long double> e_fix(x.size(), q);
    std::vector<long double> e_float(x.size(), 0);
    for (std::size_t layer = 0; layer < net.layers().size(); ++layer) {
        const auto& g = std::get<DenseGeometry>(net.layers()[layer].geometry);
        const Activation act = net.layers()[layer].activation;
        const ActivationBounds ab = bounds_for(act);
        const auto w = net.weights(layer);
        const auto bias = net.bias(layer);
        std::vector<long double> y(g.out_count), fy(g.out_count), ffy(g.out_count);
        for (std::size_t j = 0; j < g.out_count; ++j) {
            long double z = bias[j];
            long double dz_fix = q; // bias quantization
            long double dz_float = 0;
            long double magnitude = std::fabs(static_cast<long double>(bias[j]));
            for (std::size_t i = 0; i < g.in_count; ++i) {
                const long double wij = w[i * g.out_count + j];
                z += x[i] * wij;
                // product of quantized operands, then one rounding
                dz_fix += e_fix[i] * (std::fabs(wij) + q) + std::fabs(x[i]) * q + q;
                dz_float += e_float[i] * std::fabs(wij);
                magnitude += (std::fabs(x[i]) + e_float[i]) * std::fabs(wij);
            }
            dz_float += gamma(g.in_count + 1) * magnitude;
            y[j] = reference_activation(act, z);
            fy[j] = ab.fix_error + ab.lipschitz * dz_fix + ab.jump;
            ffy[j] = ab.float_error + ab.lipschitz * dz_float + ab.jump;
            if (act == Activation::Linear || act == Activation::Relu) {
                fy[j] = dz_fix;
                ffy[j] = dz_float;
            }
        }
        x = std::move(y);
        e_fix = std::move(fy);
        e_float = std::move(ffy);
    }
    std::vector<long double> budget(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) budget[k] = e_fix[k] + e_float[k];
    return budget;
}

} // namespace

TEST_CASE("property: float32 and fix16 agree within the derived budget") {
    Rng rng(555);
    long double widest = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Network net = testing::random_dense_network(rng, 20, 3);
        Interpreter real(net, NumericMode::Float32);
        Interpreter fixed(net, NumericMode::Fix16);
        for (int v = 0; v < 10; ++v) {
            const auto x = testing::random_input(rng, net.input_size());
            const auto f = real.run(x);
            const auto qv = fixed.run(to_fix(x));
            const auto budget = agreement_budget(net, x);
            for (std::size_t k = 0; k < f.size(); ++k) {
                const long double diff = std::fabs(static_cast<long double>(f[k]) - qv[k].to_double());
                INFO("trial " << trial << " output " << k << " diff " << static_cast<double>(diff)
                              << " budget " << static_cast<double>(budget[k]));
                CHECK(diff <= budget[k]);
                widest = std::max(widest, budget[k]);
            }
        }
    }
    // The budget should stay meaningful for inputs and weights in [-1, 1].
    CHECK(widest < 0.05L);
}
