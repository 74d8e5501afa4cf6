#include "miver/sampler.hpp"

#include <algorithm>

namespace miver {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (a + 1) +
                      0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double initial_probability(const Problem& problem) {
    bool found = false;
    double best = 0.0;
    for (const Constraint& c : problem.constraints) {
        double row_sum = 0.0;
        for (double b : c.b) row_sum += b;
        if (row_sum <= 0.0) continue;  // degenerate row, no information
        double ratio = c.bound / row_sum;
        if (!found || ratio < best) best = ratio;
        found = true;
    }
    double p0 = found ? std::min(best, 0.5) : 0.5;
    if (!problem.groups.empty()) {
        double v = static_cast<double>(problem.variants_per_group());
        p0 = std::min(p0, 1.0 / (v + 1.0));
    }
    return clamp_probability(p0);
}

BitVector generate(const ProbabilityVector& pv, Rng& rng) {
    BitVector x(pv.p.size());
    for (std::size_t j = 0; j < pv.p.size(); ++j)
        x[j] = uniform01(rng) < pv.p[j] ? 1 : 0;
    return x;
}

double expected_lhs(const ProbabilityVector& pv,
                    const std::vector<double>& row) {
    double m = 0.0;
    for (std::size_t i = 0; i < row.size() && i < pv.p.size(); ++i)
        m += row[i] * pv.p[i];
    return m;
}

}  // namespace miver
