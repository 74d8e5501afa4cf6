#ifndef MIVER_SAMPLER_HPP_
#define MIVER_SAMPLER_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "miver/problem.hpp"

namespace miver {

/// Floor keeping every probability component strictly inside (0, 1).
inline constexpr double kProbMin = 1e-6;

inline double clamp_probability(double p) {
    if (p < kProbMin) return kProbMin;
    if (p > 1.0 - kProbMin) return 1.0 - kProbMin;
    return p;
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits; hand-rolled so that draws
/// are bit-reproducible across standard library versions.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Stateless mix of a master seed with stream coordinates (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b);

/// Per-component generation probabilities plus the reference initial value.
struct ProbabilityVector {
    std::vector<double> p;
    double p0 = 0.5;

    static ProbabilityVector uniform(std::size_t dim, double p0) {
        ProbabilityVector pv;
        pv.p0 = clamp_probability(p0);
        pv.p.assign(dim, pv.p0);
        return pv;
    }
};

/// Initial probability estimate: tightest bound/row-sum ratio over the
/// constraint rows, capped by the group structure and by the unconstrained
/// default of 0.5, clamped into (0, 1).
double initial_probability(const Problem& problem);

/// Independent Bernoulli draw per component.
BitVector generate(const ProbabilityVector& pv, Rng& rng);

/// Expectation of a constraint row's left-hand side under pv.
double expected_lhs(const ProbabilityVector& pv, const std::vector<double>& row);

}  // namespace miver

#endif  // MIVER_SAMPLER_HPP_
