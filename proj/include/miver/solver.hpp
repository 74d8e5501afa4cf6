#ifndef MIVER_SOLVER_HPP_
#define MIVER_SOLVER_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "miver/adapt.hpp"
#include "miver/problem.hpp"
#include "miver/sampler.hpp"

namespace miver {

/// Elapsed-seconds source, injectable so tests can run with a
/// deterministic clock. Default (empty) means the steady wall clock.
using ClockFn = std::function<double()>;

struct SolverConfig {
    std::size_t population = 100;
    std::size_t max_steps = 0;        // 0 = no step budget
    double max_time = 0.0;            // seconds, 0 = no time budget
    std::size_t no_improve_stop = 0;  // 0 = disabled
    std::size_t workers = 1;
    AdaptConfig adapt;
    std::uint64_t seed = 1;

    std::optional<double> p0_override;
    std::optional<double> target_value;    // stop once best feasible f >= target
    std::optional<double> target_penalty;  // stop once best penalty <= target

    // Initial-probability retry: while no feasible candidate has appeared,
    // halve p0 and reset every p0_retry_steps steps, at most p0_retry_max times.
    std::size_t p0_retry_steps = 200;
    double p0_retry_factor = 0.5;
    std::size_t p0_retry_max = 10;

    std::size_t trace_stride = 10;  // sample the trace every this many steps

    void validate() const;
};

struct TraceSample {
    double elapsed = 0.0;
    std::optional<double> best_feasible;
    double best_modified = -std::numeric_limits<double>::infinity();
    double best_penalty = std::numeric_limits<double>::infinity();
    std::size_t steps = 0;
};

struct SolverState {
    std::optional<Candidate> best_feasible;
    double best_modified = -std::numeric_limits<double>::infinity();
    std::optional<Candidate> best_modified_cand;
    double best_penalty = std::numeric_limits<double>::infinity();
    std::size_t steps_made = 0;
    std::size_t steps_no_result = 0;
    std::size_t additive_step = 0;  // resets with the full rollback
    std::size_t p0_retries = 0;
    std::size_t steps_since_retry = 0;
    ImprovementWindow window;
    std::vector<TraceSample> trace;
};

struct StepReport {
    double batch_best_fm = 0.0;
    double batch_worst_fm = 0.0;
    bool improved_modified = false;
    bool improved_feasible = false;
};

/// Per-worker extrema gathered during a parallel evaluation pass.
struct WorkerExtrema {
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t best_idx = npos;    // max f_m
    std::size_t worst_idx = npos;   // min f_m
    std::size_t best_feasible_idx = npos;  // max f among f_p == 0
    std::size_t best_penalty_idx = npos;   // min f_p (ties: larger f)
    double best_fm = 0.0, worst_fm = 0.0;
    double best_feasible_f = 0.0;
    double best_penalty = 0.0;
};

/// Reduced batch extrema; indices into the candidate list.
struct BatchExtrema {
    std::size_t best_idx = WorkerExtrema::npos;
    std::size_t worst_idx = WorkerExtrema::npos;
    std::size_t best_feasible_idx = WorkerExtrema::npos;
    std::size_t best_penalty_idx = WorkerExtrema::npos;
};

/// Generates and evaluates `count` candidates. Work units are claimed
/// dynamically by idle workers; worker w draws from its own stream
/// seeded derive_seed(seed, step, w). With workers == 1 the result is
/// bit-identical to a plain serial loop over stream 0.
std::vector<Candidate> parallel_evaluate(const Problem& problem,
                                         const ProbabilityVector& pv,
                                         std::size_t count, std::size_t workers,
                                         double c_penalty,
                                         std::uint64_t seed, std::uint64_t step,
                                         std::vector<WorkerExtrema>* extrema_out = nullptr);

/// Serial reduction over the workers' extrema only.
BatchExtrema reduce_extrema(const std::vector<Candidate>& batch,
                            const std::vector<WorkerExtrema>& extrema);

/// One adaptation step: possible reset, batch generation/evaluation,
/// best/worst selection, record updates, probability adaptation.
StepReport step(const Problem& problem, ProbabilityVector& pv,
                SolverState& state, const SolverConfig& config,
                double c_penalty);

struct Solution {
    BitVector x;
    double f = 0.0;
    double f_p = 0.0;
    double f_m = 0.0;
    bool feasible = false;
    double best_penalty = std::numeric_limits<double>::infinity();
    std::size_t steps = 0;
    double elapsed = 0.0;
    std::string stop_reason;
    std::uint64_t seed = 0;
    std::vector<TraceSample> trace;
};

Solution solve(const Problem& problem, const SolverConfig& config,
               ClockFn clock = {}, const std::atomic<bool>* interrupt = nullptr);

}  // namespace miver

#endif  // MIVER_SOLVER_HPP_
