#ifndef MIVER_ADAPT_HPP_
#define MIVER_ADAPT_HPP_

#include <cstddef>
#include <deque>

#include "miver/sampler.hpp"

namespace miver {

enum class AdaptStrategy { Additive, Multiplicative };

enum class RollbackMode {
    None,             // never roll back
    Full,             // full reset when the stagnation window triggers
    PartialEachStep,  // contraction toward p0 every step, q = w / s_m
    Triggered         // contraction toward p0 only when the window triggers
};

enum class AdditiveSchedule { Harmonic, Constant };  // d_k = d/k or d_k = d

struct AdaptConfig {
    AdaptStrategy strategy = AdaptStrategy::Multiplicative;
    double d = 1.5;        // multiplicative factor (> 1), or additive base step
    AdditiveSchedule schedule = AdditiveSchedule::Harmonic;
    double w = 0.02;       // partial-rollback weight
    double delta_f = 0.0;  // stagnation improvement threshold
    std::size_t m = 50;    // stagnation window length in steps
    RollbackMode rollback_mode = RollbackMode::Full;
    bool adaptive_p0 = false;      // reset to mean(p) instead of p0
    bool literal_partial = false;  // contract only components below p0

    void validate() const;
};

/// Step the probabilities toward the best vector and away from the worst
/// by the additive amount d_k.
void adapt_additive(ProbabilityVector& pv, const BitVector& x_best,
                    const BitVector& x_worst, double d_k);

/// Five-branch multiplicative update: moves shrink the distance to the
/// nearer extreme by factor d on up-moves and grow it on down-moves,
/// mirrored around 0.5. Throws for d <= 1.
void adapt_multiplicative(ProbabilityVector& pv, const BitVector& x_best,
                          const BitVector& x_worst, double d);

/// Contract every component toward p0: p <- (p + q*p0) / (1 + q).
/// With literal_below_only, only components below p0 are pulled up.
void partial_rollback(ProbabilityVector& pv, double q_k,
                      bool literal_below_only = false);

/// Reset every component to new_p0.
void full_rollback(ProbabilityVector& pv, double new_p0);

/// Mean of the components; the adaptive reset value.
double mean_probability(const ProbabilityVector& pv);

/// Trailing window of per-step best modified-objective values used to
/// detect stagnation. Warm-up: never triggers until m steps have been
/// recorded since the last reset.
class ImprovementWindow {
  public:
    void record(double best_modified) { values_.push_back(best_modified); }
    void reset() { values_.clear(); }

    bool should_rollback(std::size_t m, double delta_f) const {
        if (m == 0 || values_.size() <= m) return false;
        double gain = values_.back() - values_[values_.size() - 1 - m];
        // delta_f = 0 means "any strict improvement keeps going"; the
        // recorded values are running maxima, so gain is never negative
        // and a strict < test would be unsatisfiable there.
        return delta_f > 0.0 ? gain < delta_f : gain <= 0.0;
    }

  private:
    std::deque<double> values_;
};

}  // namespace miver

#endif  // MIVER_ADAPT_HPP_
