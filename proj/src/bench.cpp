#include "miver/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "miver/sampler.hpp"

namespace miver {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

RunTime timed_run(const Problem& problem, SolverConfig config, double cap) {
    config.max_time = cap;
    config.max_steps = 0;
    config.no_improve_stop = 0;
    auto t0 = std::chrono::steady_clock::now();
    Solution sol = solve(problem, config);
    RunTime rt;
    rt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rt.censored = sol.stop_reason == "max_time";
    rt.achieved = config.target_penalty ? sol.best_penalty : sol.f;
    return rt;
}

double mean_seconds(const std::vector<RunTime>& runs) {
    double s = 0.0;
    for (const RunTime& r : runs) s += r.seconds;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
}

}  // namespace

void GeneratorSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (a_max < a_min || b_max < b_min)
        throw std::invalid_argument("coefficient ranges are inverted");
    if (!infeasible && (margin <= 0.0 || margin > 1.0))
        throw std::invalid_argument("margin must lie in (0, 1]");
}

Problem generate_instance(const GeneratorSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, 0xBE7C, spec.dim));
    Problem p;
    p.dim = spec.dim;
    p.linear_coeffs.resize(spec.dim);
    for (double& a : p.linear_coeffs) a = uniform_in(rng, spec.a_min, spec.a_max);
    for (std::size_t k = 0; k < spec.n_constraints; ++k) {
        Constraint c;
        c.b.resize(spec.dim);
        double sum = 0.0;
        for (double& b : c.b) {
            b = uniform_in(rng, spec.b_min, spec.b_max);
            sum += b;
        }
        c.bound = spec.margin * sum;
        p.constraints.push_back(std::move(c));
    }
    if (spec.infeasible && !p.constraints.empty()) {
        // Zero bound over an all-positive row: only x = 0 satisfies it.
        Constraint& first = p.constraints.front();
        for (double& b : first.b) b = std::max(b, spec.b_min > 0 ? spec.b_min : 1.0);
        first.bound = 0.0;
        // ...and a select-at-least-one row excludes x = 0.
        Constraint at_least_one;
        at_least_one.b.assign(spec.dim, -1.0);
        at_least_one.bound = -1.0;
        p.constraints.push_back(std::move(at_least_one));
    }
    if (spec.group_size > 1) {
        for (std::size_t start = 0; start + spec.group_size <= spec.dim;
             start += spec.group_size)
            p.groups.push_back({start, spec.group_size});
    }
    p.validate();
    return p;
}

SpeedupReport measure_speedup(const Problem& problem,
                              const SolverConfig& serial_config,
                              const SolverConfig& parallel_config,
                              std::size_t k, double pilot_seconds,
                              double safety_factor) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (pilot_seconds <= 0.0)
        throw std::invalid_argument("pilot duration must be > 0");

    SpeedupReport report;
    report.k = k;
    report.pilot_seconds = pilot_seconds;
    report.resource_count = parallel_config.workers;
    report.master_seed = serial_config.seed;

    SolverConfig pilot = serial_config;
    pilot.max_time = pilot_seconds;
    pilot.max_steps = 0;
    pilot.no_improve_stop = 0;
    pilot.target_value.reset();
    pilot.target_penalty.reset();
    Solution pilot_sol = solve(problem, pilot);
    if (pilot_sol.feasible) {
        report.target = pilot_sol.f;
        report.penalty_target = false;
    } else {
        report.target = pilot_sol.best_penalty;
        report.penalty_target = true;
    }

    const double cap = safety_factor * pilot_seconds;
    auto configure = [&](const SolverConfig& base, std::uint64_t side,
                         std::size_t run) {
        SolverConfig c = base;
        c.seed = derive_seed(report.master_seed, side, run + 1);
        if (report.penalty_target) {
            c.target_penalty = report.target;
            c.target_value.reset();
        } else {
            c.target_value = report.target;
            c.target_penalty.reset();
        }
        return c;
    };
    for (std::size_t run = 0; run < k; ++run)
        report.serial_runs.push_back(
            timed_run(problem, configure(serial_config, 1, run), cap));
    for (std::size_t run = 0; run < k; ++run)
        report.parallel_runs.push_back(
            timed_run(problem, configure(parallel_config, 2, run), cap));

    report.serial_mean = mean_seconds(report.serial_runs);
    report.parallel_mean = mean_seconds(report.parallel_runs);
    report.speedup = report.parallel_mean > 0.0
                         ? report.serial_mean / report.parallel_mean
                         : 0.0;
    report.efficiency =
        report.resource_count > 0
            ? report.speedup / static_cast<double>(report.resource_count)
            : 0.0;
    return report;
}

nlohmann::json speedup_report_to_json(const SpeedupReport& r) {
    nlohmann::json j;
    j["k"] = r.k;
    j["target"] = r.target;
    j["penalty_target"] = r.penalty_target;
    j["pilot_seconds"] = r.pilot_seconds;
    j["resource_count"] = r.resource_count;
    j["master_seed"] = r.master_seed;
    auto runs = [](const std::vector<RunTime>& rs) {
        nlohmann::json a = nlohmann::json::array();
        for (const RunTime& rt : rs)
            a.push_back({{"seconds", rt.seconds},
                         {"censored", rt.censored},
                         {"achieved", rt.achieved}});
        return a;
    };
    j["serial_runs"] = runs(r.serial_runs);
    j["parallel_runs"] = runs(r.parallel_runs);
    j["serial_mean"] = r.serial_mean;
    j["parallel_mean"] = r.parallel_mean;
    j["speedup"] = r.speedup;
    j["efficiency"] = r.efficiency;
    return j;
}

TraceTable emit_trace_plot_data(
    const std::vector<std::vector<TraceSample>>& traces, double target) {
    if (traces.empty()) throw std::invalid_argument("need at least one trace");
    TraceTable table;
    table.csv = "run_id,elapsed,best_value\n";
    for (std::size_t run = 0; run < traces.size(); ++run) {
        std::optional<double> hit;
        for (const TraceSample& s : traces[run]) {
            double value = s.best_feasible ? *s.best_feasible : s.best_modified;
            table.csv += std::to_string(run);
            table.csv += ',';
            table.csv += fmt_double(s.elapsed);
            table.csv += ',';
            table.csv += fmt_double(value);
            table.csv += '\n';
            if (!hit && value >= target) hit = s.elapsed;
        }
        table.time_to_target.push_back(hit);
    }
    table.csv += "target,0," + fmt_double(target) + "\n";
    return table;
}

}  // namespace miver
