#include "miver/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace miver {

namespace {

ClockFn steady_clock_fn() {
    auto t0 = std::chrono::steady_clock::now();
    return [t0]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
            .count();
    };
}

void update_extrema(WorkerExtrema& e, const Candidate& c, std::size_t idx) {
    if (e.best_idx == WorkerExtrema::npos || c.f_m > e.best_fm) {
        e.best_idx = idx;
        e.best_fm = c.f_m;
    }
    if (e.worst_idx == WorkerExtrema::npos || c.f_m < e.worst_fm) {
        e.worst_idx = idx;
        e.worst_fm = c.f_m;
    }
    if (c.f_p == 0.0 &&
        (e.best_feasible_idx == WorkerExtrema::npos || c.f > e.best_feasible_f)) {
        e.best_feasible_idx = idx;
        e.best_feasible_f = c.f;
    }
    if (e.best_penalty_idx == WorkerExtrema::npos || c.f_p < e.best_penalty) {
        e.best_penalty_idx = idx;
        e.best_penalty = c.f_p;
    }
}

}  // namespace

void SolverConfig::validate() const {
    if (population < 2)
        throw std::invalid_argument("population must be >= 2");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (max_steps == 0 && max_time <= 0.0 && no_improve_stop == 0)
        throw std::invalid_argument(
            "at least one stop condition (max-steps, max-time, "
            "no-improve-stop) must be set");
    if (p0_retry_factor <= 0.0 || p0_retry_factor >= 1.0)
        throw std::invalid_argument("p0 retry factor must lie in (0, 1)");
    if (trace_stride == 0)
        throw std::invalid_argument("trace stride must be >= 1");
    adapt.validate();
}

std::vector<Candidate> parallel_evaluate(const Problem& problem,
                                         const ProbabilityVector& pv,
                                         std::size_t count, std::size_t workers,
                                         double c_penalty, std::uint64_t seed,
                                         std::uint64_t step,
                                         std::vector<WorkerExtrema>* extrema_out) {
    std::vector<Candidate> batch(count);
    std::vector<WorkerExtrema> extrema(workers);

    if (workers == 1) {
        Rng rng(derive_seed(seed, step, 0));
        for (std::size_t i = 0; i < count; ++i) {
            batch[i] = evaluate_modified(problem, generate(pv, rng), c_penalty);
            update_extrema(extrema[0], batch[i], i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto run = [&](std::size_t w) {
            Rng rng(derive_seed(seed, step, w));
            WorkerExtrema& e = extrema[w];
            for (;;) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= count) break;
                batch[i] =
                    evaluate_modified(problem, generate(pv, rng), c_penalty);
                update_extrema(e, batch[i], i);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
        run(0);
        for (std::thread& t : pool) t.join();
    }

    if (extrema_out) *extrema_out = std::move(extrema);
    return batch;
}

BatchExtrema reduce_extrema(const std::vector<Candidate>& batch,
                            const std::vector<WorkerExtrema>& extrema) {
    BatchExtrema r;
    for (const WorkerExtrema& e : extrema) {
        if (e.best_idx != WorkerExtrema::npos &&
            (r.best_idx == WorkerExtrema::npos ||
             e.best_fm > batch[r.best_idx].f_m ||
             (e.best_fm == batch[r.best_idx].f_m && e.best_idx < r.best_idx)))
            r.best_idx = e.best_idx;
        if (e.worst_idx != WorkerExtrema::npos &&
            (r.worst_idx == WorkerExtrema::npos ||
             e.worst_fm < batch[r.worst_idx].f_m ||
             (e.worst_fm == batch[r.worst_idx].f_m && e.worst_idx < r.worst_idx)))
            r.worst_idx = e.worst_idx;
        if (e.best_feasible_idx != WorkerExtrema::npos &&
            (r.best_feasible_idx == WorkerExtrema::npos ||
             e.best_feasible_f > batch[r.best_feasible_idx].f ||
             (e.best_feasible_f == batch[r.best_feasible_idx].f &&
              e.best_feasible_idx < r.best_feasible_idx)))
            r.best_feasible_idx = e.best_feasible_idx;
        if (e.best_penalty_idx != WorkerExtrema::npos &&
            (r.best_penalty_idx == WorkerExtrema::npos ||
             e.best_penalty < batch[r.best_penalty_idx].f_p ||
             (e.best_penalty == batch[r.best_penalty_idx].f_p &&
              e.best_penalty_idx < r.best_penalty_idx)))
            r.best_penalty_idx = e.best_penalty_idx;
    }
    return r;
}

StepReport step(const Problem& problem, ProbabilityVector& pv,
                SolverState& state, const SolverConfig& config,
                double c_penalty) {
    const AdaptConfig& ac = config.adapt;

    // Reset phase runs before generation, matching the serial loop order.
    if (!state.best_feasible && config.p0_retry_steps > 0 &&
        state.p0_retries < config.p0_retry_max &&
        state.steps_since_retry >= config.p0_retry_steps) {
        pv.p0 = clamp_probability(pv.p0 * config.p0_retry_factor);
        full_rollback(pv, pv.p0);
        state.window.reset();
        state.additive_step = 0;
        ++state.p0_retries;
        state.steps_since_retry = 0;
    }
    switch (ac.rollback_mode) {
        case RollbackMode::None:
            break;
        case RollbackMode::PartialEachStep: {
            double s_m = static_cast<double>(
                std::max<std::size_t>(1, state.steps_no_result));
            partial_rollback(pv, ac.w / s_m, ac.literal_partial);
            break;
        }
        case RollbackMode::Full:
            if (state.window.should_rollback(ac.m, ac.delta_f)) {
                double p0 = ac.adaptive_p0
                                ? clamp_probability(mean_probability(pv))
                                : pv.p0;
                full_rollback(pv, p0);
                state.window.reset();
                state.additive_step = 0;
            }
            break;
        case RollbackMode::Triggered:
            if (state.window.should_rollback(ac.m, ac.delta_f)) {
                double s_m = static_cast<double>(
                    std::max<std::size_t>(1, state.steps_no_result));
                partial_rollback(pv, ac.w / s_m, ac.literal_partial);
                state.window.reset();
            }
            break;
    }

    ++state.steps_made;
    ++state.steps_no_result;
    ++state.steps_since_retry;
    ++state.additive_step;

    std::vector<WorkerExtrema> extrema;
    std::vector<Candidate> batch =
        parallel_evaluate(problem, pv, config.population, config.workers,
                          c_penalty, config.seed, state.steps_made, &extrema);
    BatchExtrema ext = reduce_extrema(batch, extrema);

    StepReport report;
    report.batch_best_fm = batch[ext.best_idx].f_m;
    report.batch_worst_fm = batch[ext.worst_idx].f_m;

    if (batch[ext.best_idx].f_m > state.best_modified) {
        state.best_modified = batch[ext.best_idx].f_m;
        state.best_modified_cand = batch[ext.best_idx];
        state.steps_no_result = 0;
        report.improved_modified = true;
    }
    if (ext.best_feasible_idx != WorkerExtrema::npos) {
        const Candidate& c = batch[ext.best_feasible_idx];
        if (!state.best_feasible || c.f > state.best_feasible->f) {
            state.best_feasible = c;
            report.improved_feasible = true;
        }
    }
    if (batch[ext.best_penalty_idx].f_p < state.best_penalty)
        state.best_penalty = batch[ext.best_penalty_idx].f_p;

    state.window.record(state.best_modified);

    const BitVector& x_best = batch[ext.best_idx].x;
    const BitVector& x_worst = batch[ext.worst_idx].x;
    if (ac.strategy == AdaptStrategy::Additive) {
        double d_k = ac.schedule == AdditiveSchedule::Harmonic
                         ? ac.d / static_cast<double>(state.additive_step)
                         : ac.d;
        adapt_additive(pv, x_best, x_worst, d_k);
    } else {
        adapt_multiplicative(pv, x_best, x_worst, ac.d);
    }
    return report;
}

Solution solve(const Problem& problem, const SolverConfig& config,
               ClockFn clock, const std::atomic<bool>* interrupt) {
    problem.validate();
    config.validate();
    ClockFn clk = clock ? std::move(clock) : steady_clock_fn();
    const double t0 = clk();
    const double c_penalty = effective_penalty_coefficient(problem);

    ProbabilityVector pv = ProbabilityVector::uniform(
        problem.dim,
        config.p0_override ? *config.p0_override : initial_probability(problem));
    SolverState state;

    auto sample_trace = [&](double elapsed) {
        TraceSample s;
        s.elapsed = elapsed;
        if (state.best_feasible) s.best_feasible = state.best_feasible->f;
        s.best_modified = state.best_modified;
        s.best_penalty = state.best_penalty;
        s.steps = state.steps_made;
        state.trace.push_back(s);
    };

    std::string stop_reason;
    for (;;) {
        if (config.max_steps > 0 && state.steps_made >= config.max_steps) {
            stop_reason = "max_steps";
            break;
        }
        double elapsed = clk() - t0;
        if (config.max_time > 0.0 && elapsed >= config.max_time) {
            stop_reason = "max_time";
            break;
        }
        if (config.no_improve_stop > 0 &&
            state.steps_no_result >= config.no_improve_stop) {
            stop_reason = "no_improvement";
            break;
        }
        if (config.target_value && state.best_feasible &&
            state.best_feasible->f >= *config.target_value) {
            stop_reason = "target_value";
            break;
        }
        if (config.target_penalty &&
            state.best_penalty <= *config.target_penalty) {
            stop_reason = "target_penalty";
            break;
        }
        if (interrupt && interrupt->load(std::memory_order_relaxed)) {
            stop_reason = "interrupted";
            break;
        }

        StepReport report = step(problem, pv, state, config, c_penalty);
        if (state.steps_made % config.trace_stride == 0 ||
            report.improved_modified || report.improved_feasible)
            sample_trace(clk() - t0);
    }
    if (state.trace.empty() || state.trace.back().steps != state.steps_made)
        sample_trace(clk() - t0);

    Solution sol;
    sol.seed = config.seed;
    sol.steps = state.steps_made;
    sol.elapsed = clk() - t0;
    sol.stop_reason = stop_reason;
    sol.best_penalty = state.best_penalty;
    sol.trace = std::move(state.trace);
    if (state.best_feasible) {
        const Candidate& c = *state.best_feasible;
        sol.x = c.x;
        sol.f = c.f;
        sol.f_p = c.f_p;
        sol.f_m = c.f_m;
        sol.feasible = true;
    } else {
        // No feasible point sampled: report the modified-objective maximizer.
        Candidate c =
            state.best_modified_cand
                ? *state.best_modified_cand
                : evaluate_modified(problem, BitVector(problem.dim, 0),
                                    c_penalty);
        sol.x = c.x;
        sol.f = c.f;
        sol.f_p = c.f_p;
        sol.f_m = c.f_m;
        sol.feasible = false;
    }
    return sol;
}

}  // namespace miver
