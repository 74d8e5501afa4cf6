#ifndef MIVER_BENCH_HPP_
#define MIVER_BENCH_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "miver/solver.hpp"

namespace miver {

/// Random-instance recipe. Bounds B_k are margin * (row sum), so x = 0 is
/// always feasible and the feasible region is nontrivial. The infeasible
/// variant zeroes one all-positive row's bound and adds a
/// select-at-least-one row (coefficients -1, bound -1) that conflicts
/// with it.
struct GeneratorSpec {
    std::size_t dim = 100;
    std::size_t n_constraints = 5;
    double a_min = 1.0, a_max = 100.0;
    double b_min = 1.0, b_max = 100.0;
    double margin = 0.3;
    std::size_t group_size = 0;  // variants per group, 0 = no groups
    std::uint64_t seed = 1;
    bool infeasible = false;

    void validate() const;
};

Problem generate_instance(const GeneratorSpec& spec);

struct RunTime {
    double seconds = 0.0;
    bool censored = false;
    double achieved = 0.0;  // value (or penalty) at stop
};

struct SpeedupReport {
    std::size_t k = 0;
    double target = 0.0;
    bool penalty_target = false;  // infeasible protocol: race to a penalty level
    double pilot_seconds = 0.0;
    std::size_t resource_count = 1;
    std::uint64_t master_seed = 0;
    std::vector<RunTime> serial_runs;
    std::vector<RunTime> parallel_runs;
    double serial_mean = 0.0;
    double parallel_mean = 0.0;
    double speedup = 0.0;
    double efficiency = 0.0;
};

/// Time-to-target comparison: a pilot serial run fixes the target value
/// (objective, or best penalty when the pilot finds nothing feasible),
/// then K serial and K parallel runs race to it on fresh seeds. Runs are
/// censored at safety_factor * pilot_seconds.
SpeedupReport measure_speedup(const Problem& problem,
                              const SolverConfig& serial_config,
                              const SolverConfig& parallel_config,
                              std::size_t k, double pilot_seconds,
                              double safety_factor = 100.0);

nlohmann::json speedup_report_to_json(const SpeedupReport& r);

struct TraceTable {
    std::string csv;  // run_id,elapsed,best_value long format + target row
    std::vector<std::optional<double>> time_to_target;  // nullopt = censored
};

TraceTable emit_trace_plot_data(
    const std::vector<std::vector<TraceSample>>& traces, double target);

}  // namespace miver

#endif  // MIVER_BENCH_HPP_
