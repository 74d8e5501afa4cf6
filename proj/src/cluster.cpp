#include "miver/cluster.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
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

// Global-leader ordering: any feasible record beats any infeasible one,
// then higher value, then lower node id.
struct LeaderRecord {
    bool valid = false;
    bool feasible = false;
    double f = 0.0;
    int sender = -1;
};

bool beats(bool feasible, double f, int sender, const LeaderRecord& cur) {
    if (!cur.valid) return true;
    if (feasible != cur.feasible) return feasible;
    if (f != cur.f) return f > cur.f;
    return sender < cur.sender;
}

Solution make_solution(const Problem& problem, const SolverState& state,
                       double c_penalty, const SolverConfig& config,
                       double elapsed, std::string stop_reason) {
    Solution sol;
    sol.seed = config.seed;
    sol.steps = state.steps_made;
    sol.elapsed = elapsed;
    sol.stop_reason = std::move(stop_reason);
    sol.best_penalty = state.best_penalty;
    sol.trace = state.trace;
    const Candidate* c = nullptr;
    if (state.best_feasible) {
        c = &*state.best_feasible;
        sol.feasible = true;
    } else if (state.best_modified_cand) {
        c = &*state.best_modified_cand;
    }
    if (c) {
        sol.x = c->x;
        sol.f = c->f;
        sol.f_p = c->f_p;
        sol.f_m = c->f_m;
    } else {
        Candidate zero =
            evaluate_modified(problem, BitVector(problem.dim, 0), c_penalty);
        sol.x = zero.x;
        sol.f = zero.f;
        sol.f_p = zero.f_p;
        sol.f_m = zero.f_m;
    }
    return sol;
}

}  // namespace

InProcessHub::InProcessHub(std::size_t n_nodes) {
    inboxes_.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i)
        inboxes_.push_back(std::make_unique<Inbox>());
}

class InProcessTransport : public Transport {
  public:
    InProcessTransport(InProcessHub& hub, int node_id)
        : hub_(hub), node_id_(node_id) {}

    void broadcast(const Message& msg) override {
        for (std::size_t i = 0; i < hub_.inboxes_.size(); ++i) {
            if (static_cast<int>(i) == node_id_) continue;
            InProcessHub::Inbox& box = *hub_.inboxes_[i];
            std::lock_guard<std::mutex> lock(box.mu);
            box.queue.push_back(msg);
        }
    }

    std::optional<Message> poll() override {
        InProcessHub::Inbox& box = *hub_.inboxes_[node_id_];
        std::lock_guard<std::mutex> lock(box.mu);
        if (box.queue.empty()) return std::nullopt;
        Message msg = std::move(box.queue.front());
        box.queue.pop_front();
        return msg;
    }

  private:
    InProcessHub& hub_;
    int node_id_;
};

std::unique_ptr<Transport> InProcessHub::transport_for(int node_id) {
    if (node_id < 0 || static_cast<std::size_t>(node_id) >= inboxes_.size())
        throw std::invalid_argument("node id out of range");
    return std::make_unique<InProcessTransport>(*this, node_id);
}

ProbabilityVector reconstruct_probability(const BitVector& x_best,
                                          std::optional<double> p_avg,
                                          std::size_t v) {
    const std::size_t d = x_best.size();
    double avg;
    if (p_avg) {
        avg = *p_avg;
    } else {
        double ones = 0.0;
        for (std::uint8_t b : x_best) ones += b;
        avg = d > 0 ? ones / static_cast<double>(d) : 0.5;
    }
    avg = clamp_probability(avg);
    double c_corr = v >= 1 ? 0.5 / static_cast<double>(v) : avg;

    ProbabilityVector pv;
    pv.p0 = avg;
    pv.p.resize(d);
    const double denom = c_corr + (1.0 - 2.0 * c_corr) * avg;
    for (std::size_t i = 0; i < d; ++i) {
        double num = (c_corr + (1.0 - 2.0 * c_corr) * (x_best[i] ? 1.0 : 0.0)) * avg;
        pv.p[i] = clamp_probability(num / denom);
    }
    return pv;
}

void ClusterConfig::validate() const {
    solver.validate();
    if (quiet_period <= 0.0)
        throw std::invalid_argument("quiet period must be > 0");
}

NodeResult node_loop(const Problem& problem, const ClusterConfig& config,
                     Transport& transport, int node_id, ClockFn clock,
                     const std::atomic<bool>* interrupt) {
    problem.validate();
    config.validate();
    const SolverConfig& sc = config.solver;
    ClockFn clk = clock ? std::move(clock) : steady_clock_fn();
    const double t0 = clk();
    const double c_penalty = effective_penalty_coefficient(problem);
    const bool coordinator = node_id == 0;
    const std::size_t v = problem.variants_per_group();

    ProbabilityVector pv = ProbabilityVector::uniform(
        problem.dim,
        sc.p0_override ? *sc.p0_override : initial_probability(problem));
    SolverState state;

    LeaderRecord leader;
    double global_feasible = -std::numeric_limits<double>::infinity();
    double global_modified = -std::numeric_limits<double>::infinity();
    bool has_global_feasible = false;
    std::optional<Message> remote_feasible;  // best received, per kind
    std::optional<Message> remote_modified;
    std::size_t c = 0;
    double last_report = t0;
    bool warned_unhealthy = false;
    std::string stop_reason;

    auto sample_trace = [&](double elapsed) {
        TraceSample s;
        s.elapsed = elapsed;
        if (state.best_feasible) s.best_feasible = state.best_feasible->f;
        s.best_modified = state.best_modified;
        s.best_penalty = state.best_penalty;
        s.steps = state.steps_made;
        state.trace.push_back(s);
    };

    while (stop_reason.empty()) {
        if (!transport.healthy() && !warned_unhealthy) {
            std::fprintf(stderr,
                         "miver: node %d transport down, continuing as "
                         "isolated multistart\n",
                         node_id);
            warned_unhealthy = true;
        }

        // Drain the inbox; keep the global picture fresh even though
        // reseeding decisions only happen at c > c_max.
        while (auto msg = transport.poll()) {
            const double now = clk();
            switch (msg->kind) {
                case MessageKind::Stop:
                    stop_reason = "stop_message";
                    break;
                case MessageKind::ImproveFeasible:
                    last_report = now;
                    if (msg->f > global_feasible) {
                        global_feasible = msg->f;
                        has_global_feasible = true;
                        remote_feasible = *msg;
                    }
                    if (beats(true, msg->f, msg->sender, leader))
                        leader = {true, true, msg->f, msg->sender};
                    break;
                case MessageKind::ImproveModified:
                    last_report = now;
                    if (msg->f > global_modified) {
                        global_modified = msg->f;
                        remote_modified = *msg;
                    }
                    if (beats(false, msg->f, msg->sender, leader))
                        leader = {true, false, msg->f, msg->sender};
                    break;
            }
            if (!stop_reason.empty()) break;
        }
        if (!stop_reason.empty()) break;

        double elapsed = clk() - t0;
        if (sc.max_steps > 0 && state.steps_made >= sc.max_steps) {
            stop_reason = "max_steps";
            break;
        }
        if (sc.max_time > 0.0 && elapsed >= sc.max_time) {
            stop_reason = "max_time";
            break;
        }
        if (interrupt && interrupt->load(std::memory_order_relaxed)) {
            stop_reason = "interrupted";
            break;
        }
        if (coordinator) {
            if (config.target_value &&
                ((state.best_feasible &&
                  state.best_feasible->f >= *config.target_value) ||
                 (has_global_feasible &&
                  global_feasible >= *config.target_value))) {
                transport.broadcast(
                    {MessageKind::Stop, node_id, 0.0, {}, std::nullopt, elapsed});
                stop_reason = "target_value";
                break;
            }
            if (elapsed - (last_report - t0) > config.quiet_period) {
                transport.broadcast(
                    {MessageKind::Stop, node_id, 0.0, {}, std::nullopt, elapsed});
                stop_reason = "quiet_period";
                break;
            }
        }

        StepReport report = step(problem, pv, state, sc, c_penalty);
        ++c;
        if (report.improved_feasible || report.improved_modified) c = 0;

        if (report.improved_feasible) {
            double f = state.best_feasible->f;
            if (f > global_feasible) {
                global_feasible = f;
                has_global_feasible = true;
                Message msg{MessageKind::ImproveFeasible, node_id, f,
                            state.best_feasible->x, mean_probability(pv),
                            clk() - t0};
                transport.broadcast(msg);
                last_report = clk();
                if (beats(true, f, node_id, leader))
                    leader = {true, true, f, node_id};
            }
        }
        if (report.improved_modified) {
            double f = state.best_modified;
            if (f > global_modified) {
                global_modified = f;
                Message msg{MessageKind::ImproveModified, node_id, f,
                            state.best_modified_cand->x, mean_probability(pv),
                            clk() - t0};
                transport.broadcast(msg);
                last_report = clk();
                if (beats(false, f, node_id, leader))
                    leader = {true, false, f, node_id};
            }
        }

        if (state.steps_made % sc.trace_stride == 0 ||
            report.improved_modified || report.improved_feasible)
            sample_trace(clk() - t0);

        if (c > config.c_max) {
            if (leader.valid && leader.sender != node_id) {
                // A better remote result is known: adopt it and restart
                // the search around the received vector.
                const Message* m = remote_feasible ? &*remote_feasible
                                                   : (remote_modified
                                                          ? &*remote_modified
                                                          : nullptr);
                if (m && config.reseed_from_x && !m->x.empty()) {
                    pv = reconstruct_probability(m->x, m->p_avg, v);
                } else if (m) {
                    double ones = 0.0;
                    for (std::uint8_t b : m->x) ones += b;
                    double avg = m->p_avg ? *m->p_avg
                                          : (m->x.empty()
                                                 ? pv.p0
                                                 : ones / static_cast<double>(
                                                              m->x.size()));
                    full_rollback(pv, clamp_probability(avg));
                } else {
                    full_rollback(pv, sc.adapt.adaptive_p0
                                          ? clamp_probability(
                                                mean_probability(pv))
                                          : pv.p0);
                }
                state.window.reset();
                state.additive_step = 0;
            } else if (leader.valid && leader.sender == node_id) {
                // Our own record still stands globally; with reliable
                // delivery a re-broadcast repeats a value every peer has,
                // so just keep searching without a rollback.
            } else {
                full_rollback(pv, sc.adapt.adaptive_p0
                                      ? clamp_probability(mean_probability(pv))
                                      : pv.p0);
                state.window.reset();
                state.additive_step = 0;
            }
            c = 0;
        }
    }

    // Whatever stopped the coordinator, release the other nodes too.
    if (coordinator && stop_reason != "quiet_period" &&
        stop_reason != "target_value")
        transport.broadcast(
            {MessageKind::Stop, node_id, 0.0, {}, std::nullopt, clk() - t0});

    if (state.trace.empty() || state.trace.back().steps != state.steps_made)
        sample_trace(clk() - t0);

    NodeResult result;
    result.node_id = node_id;
    result.x_opt = leader.valid && leader.sender == node_id;
    result.is_global_leader = result.x_opt;
    result.local =
        make_solution(problem, state, c_penalty, sc, clk() - t0, stop_reason);
    result.global_feasible = has_global_feasible ? global_feasible : 0.0;
    result.has_global_feasible = has_global_feasible;
    return result;
}

ClusterSolution cluster_run_in_process(const Problem& problem,
                                       const ClusterConfig& config,
                                       std::size_t n_nodes, ClockFn clock,
                                       const std::atomic<bool>* interrupt) {
    if (n_nodes < 1) throw std::invalid_argument("need at least one node");
    config.validate();
    InProcessHub hub(n_nodes);
    std::vector<NodeResult> results(n_nodes);
    std::vector<std::thread> threads;
    threads.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        threads.emplace_back([&, i]() {
            ClusterConfig node_cfg = config;
            node_cfg.solver.seed =
                derive_seed(config.solver.seed, i, 0xC105);
            auto transport = hub.transport_for(static_cast<int>(i));
            results[i] = node_loop(problem, node_cfg, *transport,
                                   static_cast<int>(i), clock, interrupt);
        });
    }
    for (std::thread& t : threads) t.join();

    ClusterSolution out;
    out.nodes = std::move(results);
    // Prefer the x_opt claimant; fall back to the best local result.
    const NodeResult* winner = nullptr;
    for (const NodeResult& r : out.nodes)
        if (r.x_opt && (!winner || beats(r.local.feasible, r.local.f,
                                         r.node_id,
                                         LeaderRecord{true, winner->local.feasible,
                                                      winner->local.f,
                                                      winner->node_id})))
            winner = &r;
    if (!winner)
        for (const NodeResult& r : out.nodes)
            if (!winner || beats(r.local.feasible, r.local.f, r.node_id,
                                 LeaderRecord{true, winner->local.feasible,
                                              winner->local.f,
                                              winner->node_id}))
                winner = &r;
    out.winner_node = winner->node_id;
    out.solution = winner->local;
    return out;
}

}  // namespace miver
