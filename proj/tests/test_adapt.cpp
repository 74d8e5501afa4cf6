#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "miver/adapt.hpp"

using namespace miver;

namespace {

ProbabilityVector single(double p, double p0 = 0.5) {
    ProbabilityVector pv;
    pv.p = {p};
    pv.p0 = p0;
    return pv;
}

}  // namespace

TEST_CASE("additive adaptation") {
    ProbabilityVector pv = single(0.5);
    adapt_additive(pv, {1}, {0}, 0.1);
    CHECK(pv.p[0] == doctest::Approx(0.6));

    pv = single(0.5);
    adapt_additive(pv, {1}, {1}, 0.1);
    CHECK(pv.p[0] == doctest::Approx(0.5));

    pv = single(0.99);
    adapt_additive(pv, {1}, {0}, 0.1);
    CHECK(pv.p[0] == doctest::Approx(1.0 - kProbMin));

    pv = single(0.5);
    adapt_additive(pv, {0}, {1}, 0.1);
    CHECK(pv.p[0] == doctest::Approx(0.4));
}

TEST_CASE("multiplicative adaptation branches") {
    ProbabilityVector pv = single(0.25);
    adapt_multiplicative(pv, {1}, {0}, 2.0);
    CHECK(pv.p[0] == doctest::Approx(0.5));

    pv = single(0.8);
    adapt_multiplicative(pv, {1}, {0}, 2.0);
    CHECK(pv.p[0] == doctest::Approx(0.9));

    pv = single(0.25);
    adapt_multiplicative(pv, {0}, {1}, 2.0);
    CHECK(pv.p[0] == doctest::Approx(0.125));

    pv = single(0.8);
    adapt_multiplicative(pv, {0}, {1}, 2.0);
    CHECK(pv.p[0] == doctest::Approx(0.6));

    pv = single(0.8);
    adapt_multiplicative(pv, {1}, {1}, 2.0);
    CHECK(pv.p[0] == doctest::Approx(0.8));

    // Down-move at p >= 0.5 with large d would go nonpositive; it floors.
    pv = single(0.6);
    adapt_multiplicative(pv, {0}, {1}, 10.0);
    CHECK(pv.p[0] == doctest::Approx(kProbMin));

    CHECK_THROWS_AS(adapt_multiplicative(pv, {1}, {0}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("multiplicative up/down moves invert each other") {
    for (double d : {1.1, 1.5, 2.0, 3.0}) {
        for (double p0 = 0.02; p0 < 0.98; p0 += 0.009) {
            ProbabilityVector pv = single(p0);
            adapt_multiplicative(pv, {1}, {0}, d);
            double up = pv.p[0];
            // Stay within one half-interval and away from the clamps.
            bool same_half = (p0 < 0.5) == (up < 0.5);
            if (!same_half || up >= 1.0 - 2 * kProbMin || up <= 2 * kProbMin)
                continue;
            adapt_multiplicative(pv, {0}, {1}, d);
            CHECK(pv.p[0] == doctest::Approx(p0).epsilon(1e-12));
        }
    }
}

TEST_CASE("chosen multiplicative branch is monotone in p on each half") {
    const double d = 1.7;
    double prev_p = -1.0, prev_up = 0.0, prev_down = 0.0;
    for (double p = 0.01; p < 0.995; p += 0.001) {
        ProbabilityVector up = single(p), down = single(p);
        adapt_multiplicative(up, {1}, {0}, d);
        adapt_multiplicative(down, {0}, {1}, d);
        if (prev_p >= 0.0 && (prev_p < 0.5) == (p < 0.5)) {
            CHECK(up.p[0] >= prev_up - 1e-15);
            CHECK(down.p[0] >= prev_down - 1e-15);
        }
        prev_p = p;
        prev_up = up.p[0];
        prev_down = down.p[0];
    }
}

TEST_CASE("partial rollback") {
    ProbabilityVector pv = single(0.02, 0.1);
    partial_rollback(pv, 0.05);
    CHECK(pv.p[0] == doctest::Approx((0.02 + 0.05 * 0.1) / 1.05));

    pv = single(0.02, 0.1);
    partial_rollback(pv, 0.0);
    CHECK(pv.p[0] == doctest::Approx(0.02));

    pv = single(0.02, 0.1);
    partial_rollback(pv, 1e9);
    CHECK(pv.p[0] == doctest::Approx(0.1).epsilon(1e-6));

    // Both sides of p0 contract by default...
    pv = single(0.9, 0.1);
    partial_rollback(pv, 0.5);
    CHECK(pv.p[0] < 0.9);
    CHECK(pv.p[0] > 0.1);

    // ...but the literal mode leaves high components alone.
    pv = single(0.9, 0.1);
    partial_rollback(pv, 0.5, true);
    CHECK(pv.p[0] == doctest::Approx(0.9));
}

TEST_CASE("partial rollback is a contraction toward p0") {
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        double p0 = clamp_probability(uniform01(rng));
        double p = clamp_probability(uniform01(rng));
        double q = 2.0 * uniform01(rng);
        ProbabilityVector pv = single(p, p0);
        partial_rollback(pv, q);
        CHECK(std::fabs(pv.p[0] - p0) <= std::fabs(p - p0) + 1e-15);
        if (q > 0.0 && std::fabs(p - p0) > 1e-9)
            CHECK(std::fabs(pv.p[0] - p0) < std::fabs(p - p0));
    }
}

TEST_CASE("full rollback") {
    ProbabilityVector pv;
    pv.p = {0.2, 0.4, 0.6};
    pv.p0 = 0.1;
    double adaptive = mean_probability(pv);
    CHECK(adaptive == doctest::Approx(0.4));
    full_rollback(pv, adaptive);
    for (double p : pv.p) CHECK(p == doctest::Approx(0.4));

    full_rollback(pv, 0.1);
    for (double p : pv.p) CHECK(p == doctest::Approx(0.1));

    full_rollback(pv, 0.1);  // fixed point
    for (double p : pv.p) CHECK(p == doctest::Approx(0.1));
}

TEST_CASE("stagnation window") {
    ImprovementWindow w;
    w.record(10.0);
    w.record(10.0001);
    CHECK(w.should_rollback(1, 0.01));

    ImprovementWindow big;
    big.record(10.0);
    big.record(15.0);
    CHECK_FALSE(big.should_rollback(1, 0.01));

    ImprovementWindow young;
    young.record(1.0);
    CHECK_FALSE(young.should_rollback(3, 0.01));
    young.record(1.0);
    young.record(1.0);
    CHECK_FALSE(young.should_rollback(3, 0.01));
    young.record(1.0);
    CHECK(young.should_rollback(3, 0.01));
    young.reset();
    young.record(1.0);
    CHECK_FALSE(young.should_rollback(3, 0.01));

    // delta_f = 0: flat running maxima trigger, any strict gain does not.
    ImprovementWindow flat;
    flat.record(2.0);
    flat.record(2.0);
    CHECK(flat.should_rollback(1, 0.0));
    ImprovementWindow rising;
    rising.record(2.0);
    rising.record(2.0 + 1e-9);
    CHECK_FALSE(rising.should_rollback(1, 0.0));
}
