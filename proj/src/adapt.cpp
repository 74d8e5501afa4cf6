#include "miver/adapt.hpp"

#include <stdexcept>

namespace miver {

void AdaptConfig::validate() const {
    if (strategy == AdaptStrategy::Multiplicative && d <= 1.0)
        throw std::invalid_argument("multiplicative coefficient d must be > 1");
    if (strategy == AdaptStrategy::Additive && d <= 0.0)
        throw std::invalid_argument("additive step must be > 0");
    if (w < 0.0) throw std::invalid_argument("rollback weight w must be >= 0");
    if (delta_f < 0.0) throw std::invalid_argument("delta_f must be >= 0");
}

void adapt_additive(ProbabilityVector& pv, const BitVector& x_best,
                    const BitVector& x_worst, double d_k) {
    for (std::size_t j = 0; j < pv.p.size(); ++j) {
        if (x_best[j] == x_worst[j]) continue;
        double p = pv.p[j];
        pv.p[j] = clamp_probability(x_best[j] ? p + d_k : p - d_k);
    }
}

void adapt_multiplicative(ProbabilityVector& pv, const BitVector& x_best,
                          const BitVector& x_worst, double d) {
    if (d <= 1.0)
        throw std::invalid_argument("multiplicative coefficient d must be > 1");
    for (std::size_t j = 0; j < pv.p.size(); ++j) {
        if (x_best[j] == x_worst[j]) continue;
        double p = pv.p[j];
        double np;
        if (x_best[j]) {  // up-move
            np = p < 0.5 ? p * d : 1.0 - (1.0 - p) / d;
        } else {  // down-move
            np = p < 0.5 ? p / d : 1.0 - (1.0 - p) * d;
        }
        pv.p[j] = clamp_probability(np);
    }
}

void partial_rollback(ProbabilityVector& pv, double q_k,
                      bool literal_below_only) {
    if (q_k < 0.0) throw std::invalid_argument("q_k must be >= 0");
    if (q_k == 0.0) return;
    for (double& p : pv.p) {
        if (literal_below_only && p >= pv.p0) continue;
        p = clamp_probability((p + q_k * pv.p0) / (1.0 + q_k));
    }
}

void full_rollback(ProbabilityVector& pv, double new_p0) {
    if (new_p0 <= 0.0 || new_p0 >= 1.0)
        throw std::invalid_argument("reset probability must lie in (0, 1)");
    for (double& p : pv.p) p = clamp_probability(new_p0);
}

double mean_probability(const ProbabilityVector& pv) {
    double s = 0.0;
    for (double p : pv.p) s += p;
    return pv.p.empty() ? pv.p0 : s / static_cast<double>(pv.p.size());
}

}  // namespace miver
