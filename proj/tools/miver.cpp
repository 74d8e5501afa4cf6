#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "miver/bench.hpp"
#include "miver/cluster.hpp"
#include "miver/json_io.hpp"
#include "miver/tcp_transport.hpp"

namespace {

std::atomic<bool> g_interrupt{false};

void on_signal(int) { g_interrupt.store(true); }

struct SolverFlags {
    std::string config_path;
    std::size_t population = 0;
    std::size_t max_steps = 0;
    double max_time = 0.0;
    std::size_t no_improve_stop = 0;
    std::size_t workers = 0;
    std::uint64_t seed = 0;
    std::string adapt_strategy;
    double d = 0.0;
    double w = 0.0;
    double delta_f = 0.0;
    std::size_t m = 0;
    std::string rollback;
    bool adaptive_p0 = false;
    bool literal_partial = false;
    double p0 = 0.0;
    double target_value = 0.0;
    double target_penalty = 0.0;

    CLI::Option *o_population = nullptr, *o_max_steps = nullptr,
                *o_max_time = nullptr, *o_no_improve = nullptr,
                *o_workers = nullptr, *o_seed = nullptr, *o_adapt = nullptr,
                *o_d = nullptr, *o_w = nullptr, *o_delta_f = nullptr,
                *o_m = nullptr, *o_rollback = nullptr, *o_adaptive = nullptr,
                *o_literal = nullptr, *o_p0 = nullptr, *o_target = nullptr,
                *o_target_penalty = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "JSON config file; flags override file values");
        o_population = cmd->add_option("--population", population,
                                       "candidates generated per step");
        o_max_steps = cmd->add_option("--max-steps", max_steps,
                                      "adaptation step budget");
        o_max_time =
            cmd->add_option("--max-time", max_time, "wall-clock budget, seconds");
        o_no_improve = cmd->add_option("--no-improve-stop", no_improve_stop,
                                       "stop after this many steps without "
                                       "improvement");
        o_workers =
            cmd->add_option("--workers", workers, "parallel evaluation lanes");
        o_seed = cmd->add_option("--seed", seed, "RNG seed");
        o_adapt = cmd->add_option("--adapt", adapt_strategy,
                                  "adaptation strategy: mult | add");
        o_d = cmd->add_option("--d", d, "adaptation coefficient");
        o_w = cmd->add_option("--w", w, "partial rollback weight");
        o_delta_f = cmd->add_option("--delta-f", delta_f,
                                    "stagnation improvement threshold");
        o_m = cmd->add_option("--m", m, "stagnation window, steps");
        o_rollback = cmd->add_option(
            "--rollback", rollback,
            "none | full | partial_each_step | triggered");
        o_adaptive = cmd->add_flag("--adaptive-p0", adaptive_p0,
                                   "reset to mean probability on rollback");
        o_literal = cmd->add_flag("--literal-partial", literal_partial,
                                  "contract only components below p0");
        o_p0 = cmd->add_option("--p0", p0, "initial probability override");
        o_target = cmd->add_option("--target-value", target_value,
                                   "stop when a feasible value reaches this");
        o_target_penalty = cmd->add_option(
            "--target-penalty", target_penalty,
            "stop when the best penalty drops to this");
    }

    miver::SolverConfig build() const {
        miver::SolverConfig cfg;
        if (!config_path.empty())
            cfg = miver::solver_config_from_json(
                miver::json::parse(miver::read_text_file(config_path)));
        if (*o_population) cfg.population = population;
        if (*o_max_steps) cfg.max_steps = max_steps;
        if (*o_max_time) cfg.max_time = max_time;
        if (*o_no_improve) cfg.no_improve_stop = no_improve_stop;
        if (*o_workers) cfg.workers = workers;
        if (*o_seed) cfg.seed = seed;
        if (*o_adapt) {
            if (adapt_strategy == "mult" || adapt_strategy == "multiplicative")
                cfg.adapt.strategy = miver::AdaptStrategy::Multiplicative;
            else if (adapt_strategy == "add" || adapt_strategy == "additive") {
                cfg.adapt.strategy = miver::AdaptStrategy::Additive;
                if (!*o_d) cfg.adapt.d = 0.1;
            } else
                throw CLI::ValidationError("--adapt must be mult or add");
        }
        if (*o_d) cfg.adapt.d = d;
        if (*o_w) cfg.adapt.w = w;
        if (*o_delta_f) cfg.adapt.delta_f = delta_f;
        if (*o_m) cfg.adapt.m = m;
        if (*o_rollback) {
            if (rollback == "none")
                cfg.adapt.rollback_mode = miver::RollbackMode::None;
            else if (rollback == "full")
                cfg.adapt.rollback_mode = miver::RollbackMode::Full;
            else if (rollback == "partial_each_step")
                cfg.adapt.rollback_mode = miver::RollbackMode::PartialEachStep;
            else if (rollback == "triggered")
                cfg.adapt.rollback_mode = miver::RollbackMode::Triggered;
            else
                throw CLI::ValidationError("unknown --rollback mode");
        }
        if (*o_adaptive) cfg.adapt.adaptive_p0 = true;
        if (*o_literal) cfg.adapt.literal_partial = true;
        if (*o_p0) cfg.p0_override = p0;
        if (*o_target) cfg.target_value = target_value;
        if (*o_target_penalty) cfg.target_penalty = target_penalty;
        return cfg;
    }
};

int run_solve(const std::string& problem_path, const SolverFlags& flags,
              const std::string& trace_path, const std::string& solution_path) {
    miver::Problem problem = miver::load_problem(problem_path);
    miver::SolverConfig cfg = flags.build();
    if (cfg.max_steps == 0 && cfg.max_time <= 0.0 && cfg.no_improve_stop == 0)
        cfg.max_steps = 1000;  // default budget
    miver::Solution sol = miver::solve(problem, cfg, {}, &g_interrupt);
    miver::json out = miver::solution_to_json(sol, cfg);
    if (!solution_path.empty())
        miver::write_text_file(solution_path, out.dump(2) + "\n");
    else
        std::cout << out.dump(2) << "\n";
    if (!trace_path.empty()) miver::save_trace_csv(sol.trace, trace_path);
    return sol.feasible ? 0 : 1;
}

int run_generate(const miver::GeneratorSpec& spec, const std::string& out_path) {
    miver::Problem p = miver::generate_instance(spec);
    if (out_path.empty())
        std::cout << miver::problem_to_json(p).dump(2) << "\n";
    else
        miver::save_problem(p, out_path);
    return 0;
}

int run_bench(const std::string& problem_path, const SolverFlags& flags,
              const std::string& serial_config_path,
              const std::string& parallel_config_path, std::size_t k,
              double pilot_seconds, std::size_t parallel_workers,
              const std::string& out_path) {
    miver::Problem problem = miver::load_problem(problem_path);
    miver::SolverConfig serial_cfg = flags.build();
    serial_cfg.workers = 1;
    if (!serial_config_path.empty())
        serial_cfg = miver::solver_config_from_json(
            miver::json::parse(miver::read_text_file(serial_config_path)));
    miver::SolverConfig parallel_cfg = serial_cfg;
    parallel_cfg.workers = parallel_workers;
    if (!parallel_config_path.empty())
        parallel_cfg = miver::solver_config_from_json(
            miver::json::parse(miver::read_text_file(parallel_config_path)));
    miver::SpeedupReport report = miver::measure_speedup(
        problem, serial_cfg, parallel_cfg, k, pilot_seconds);
    miver::json out = miver::speedup_report_to_json(report);
    out["serial_config"] = miver::solver_config_to_json(serial_cfg);
    out["parallel_config"] = miver::solver_config_to_json(parallel_cfg);
    if (out_path.empty())
        std::cout << out.dump(2) << "\n";
    else
        miver::write_text_file(out_path, out.dump(2) + "\n");
    return 0;
}

int run_cluster(const std::string& problem_path, const SolverFlags& flags,
                std::size_t in_process, const std::string& bind_addr,
                const std::vector<std::string>& peers, int node_id,
                double quiet_period, std::size_t c_max, bool compress,
                const std::string& reseed_mode,
                const std::string& solution_path) {
    miver::Problem problem = miver::load_problem(problem_path);
    miver::ClusterConfig cfg;
    cfg.solver = flags.build();
    if (!*flags.o_population) cfg.solver.population = 10;
    if (!*flags.o_rollback)
        cfg.solver.adapt.rollback_mode = miver::RollbackMode::PartialEachStep;
    cfg.quiet_period = quiet_period;
    cfg.c_max = c_max;
    cfg.reseed_from_x = reseed_mode != "p_avg";
    if (*flags.o_target) cfg.target_value = flags.target_value;
    // The cluster stops on the coordinator timer; per-node budgets are
    // optional, so relax the solver's own stop-condition requirement.
    if (cfg.solver.max_steps == 0 && cfg.solver.max_time <= 0.0 &&
        cfg.solver.no_improve_stop == 0)
        cfg.solver.max_time = 24.0 * 3600.0;

    miver::Solution sol;
    miver::json extra;
    if (in_process > 0) {
        miver::ClusterSolution cs = miver::cluster_run_in_process(
            problem, cfg, in_process, {}, &g_interrupt);
        sol = cs.solution;
        extra["winner_node"] = cs.winner_node;
        extra["nodes"] = static_cast<int>(in_process);
    } else {
        miver::TcpTransport transport(bind_addr, peers, compress);
        miver::NodeResult r = miver::node_loop(problem, cfg, transport, node_id,
                                               {}, &g_interrupt);
        sol = r.local;
        extra["node_id"] = r.node_id;
        extra["x_opt"] = r.x_opt;
    }
    miver::json out = miver::solution_to_json(sol, cfg.solver);
    out["cluster"] = extra;
    if (solution_path.empty())
        std::cout << out.dump(2) << "\n";
    else
        miver::write_text_file(solution_path, out.dump(2) + "\n");
    return sol.feasible ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    CLI::App app{"Constrained pseudo-Boolean random search toolkit"};
    app.set_version_flag("--version", "miver 0.1.0");
    app.require_subcommand(1);

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "run the serial/parallel solver");
    std::string problem_path, trace_path, solution_path;
    solve_cmd->add_option("--problem", problem_path, "problem JSON file")
        ->required();
    solve_cmd->add_option("--trace", trace_path, "write a CSV trace here");
    solve_cmd->add_option("--solution", solution_path,
                          "write the solution JSON here");
    SolverFlags solve_flags;
    solve_flags.attach(solve_cmd);

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "generate a random instance");
    miver::GeneratorSpec spec;
    std::string gen_out, profile;
    gen_cmd->add_option("--dim", spec.dim, "number of Boolean variables");
    gen_cmd->add_option("--constraints", spec.n_constraints, "constraint rows");
    gen_cmd->add_option("--margin", spec.margin,
                        "bound as a fraction of the row sum");
    gen_cmd->add_option("--seed", spec.seed, "generator seed");
    gen_cmd->add_option("--a-min", spec.a_min, "objective coefficient low");
    gen_cmd->add_option("--a-max", spec.a_max, "objective coefficient high");
    gen_cmd->add_option("--b-min", spec.b_min, "constraint coefficient low");
    gen_cmd->add_option("--b-max", spec.b_max, "constraint coefficient high");
    gen_cmd->add_option("--group-size", spec.group_size,
                        "variants per group (0 = no groups)");
    gen_cmd->add_flag("--infeasible", spec.infeasible,
                      "construct an instance with no admissible solution");
    gen_cmd->add_option("--profile", profile,
                        "shape preset: smp | large");
    gen_cmd->add_option("-o,--output", gen_out, "output problem file");

    // bench
    auto* bench_cmd =
        app.add_subcommand("bench", "time-to-target speedup measurement");
    std::string bench_problem, serial_config_path, parallel_config_path,
        bench_out;
    std::size_t bench_k = 10, bench_workers = 4;
    double pilot_seconds = 60.0;
    bench_cmd->add_option("--problem", bench_problem, "problem JSON file")
        ->required();
    bench_cmd->add_option("--k", bench_k, "runs per side");
    bench_cmd->add_option("--pilot-seconds", pilot_seconds,
                          "pilot run duration fixing the target");
    bench_cmd->add_option("--serial-config", serial_config_path,
                          "serial solver config JSON");
    bench_cmd->add_option("--parallel-config", parallel_config_path,
                          "parallel solver config JSON");
    bench_cmd->add_option("--parallel-workers", bench_workers,
                          "workers for the parallel side when no config file");
    bench_cmd->add_option("-o,--output", bench_out, "report output file");
    SolverFlags bench_flags;
    bench_flags.attach(bench_cmd);

    // cluster-run
    auto* cluster_cmd =
        app.add_subcommand("cluster-run", "multi-node multistart search");
    std::string cluster_problem, bind_addr, cluster_solution, reseed_mode = "x";
    std::vector<std::string> peers;
    std::size_t in_process = 0, c_max = 500;
    int node_id = 0;
    double quiet_period = 30.0;
    bool compress = false;
    cluster_cmd->add_option("--problem", cluster_problem, "problem JSON file")
        ->required();
    cluster_cmd->add_option("--in-process", in_process,
                            "run this many nodes inside one process");
    cluster_cmd->add_option("--bind", bind_addr, "listen address host:port");
    cluster_cmd->add_option("--peers", peers, "peer addresses host:port")
        ->delimiter(',');
    cluster_cmd->add_option("--node-id", node_id,
                            "this node's id (0 = coordinator)");
    cluster_cmd->add_option("--quiet-period", quiet_period,
                            "coordinator stop timer, seconds");
    cluster_cmd->add_option("--c-max", c_max,
                            "stagnation steps before message handling");
    cluster_cmd->add_flag("--compress", compress,
                          "run-length compress large bit vectors on the wire");
    cluster_cmd->add_option("--reseed", reseed_mode,
                            "reseed mode after adoption: x | p_avg");
    cluster_cmd->add_option("--solution", cluster_solution,
                            "write the solution JSON here");
    SolverFlags cluster_flags;
    cluster_flags.attach(cluster_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*solve_cmd)
            return run_solve(problem_path, solve_flags, trace_path,
                             solution_path);
        if (*gen_cmd) {
            if (profile == "smp") {
                spec.dim = 100;
                spec.n_constraints = 105;
            } else if (profile == "large") {
                spec.dim = 10000;
                spec.n_constraints = 105;
            } else if (!profile.empty()) {
                std::cerr << "unknown profile '" << profile << "'\n";
                return 2;
            }
            return run_generate(spec, gen_out);
        }
        if (*bench_cmd)
            return run_bench(bench_problem, bench_flags, serial_config_path,
                             parallel_config_path, bench_k, pilot_seconds,
                             bench_workers, bench_out);
        if (*cluster_cmd) {
            if (in_process == 0 && bind_addr.empty()) {
                std::cerr << "cluster-run needs --in-process N or --bind\n";
                return 2;
            }
            return run_cluster(cluster_problem, cluster_flags, in_process,
                               bind_addr, peers, node_id, quiet_period, c_max,
                               compress, reseed_mode, cluster_solution);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
