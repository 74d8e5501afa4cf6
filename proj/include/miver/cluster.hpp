#ifndef MIVER_CLUSTER_HPP_
#define MIVER_CLUSTER_HPP_

#include <atomic>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "miver/solver.hpp"

namespace miver {

enum class MessageKind { ImproveFeasible, ImproveModified, Stop };

/// Wire record exchanged between nodes. Bit vectors travel as 0/1
/// strings on the wire; in memory we keep the decoded form.
struct Message {
    MessageKind kind = MessageKind::Stop;
    int sender = 0;
    double f = 0.0;
    BitVector x;
    std::optional<double> p_avg;
    double ts = 0.0;
};

/// Point-to-point-reliable broadcast transport. poll() is non-blocking.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual void broadcast(const Message& msg) = 0;
    virtual std::optional<Message> poll() = 0;
    virtual bool healthy() const { return true; }
};

/// Drops everything; a node on this transport degrades to isolated
/// multistart.
class NullTransport : public Transport {
  public:
    void broadcast(const Message&) override {}
    std::optional<Message> poll() override { return std::nullopt; }
};

/// Shared mailbox hub for running several nodes inside one process.
class InProcessHub {
  public:
    explicit InProcessHub(std::size_t n_nodes);
    std::unique_ptr<Transport> transport_for(int node_id);
    std::size_t size() const { return inboxes_.size(); }

  private:
    friend class InProcessTransport;
    struct Inbox {
        std::mutex mu;
        std::deque<Message> queue;
    };
    std::vector<std::unique_ptr<Inbox>> inboxes_;
};

/// New probability vector concentrated around a received best vector:
/// p_i = (C + (1-2C)x_i) * p_avg / (C + (1-2C) * p_avg), C = 0.5/V.
/// With p_avg absent it is estimated as the density of x_best; with
/// V == 0 (no group structure) C falls back to p_avg.
ProbabilityVector reconstruct_probability(const BitVector& x_best,
                                          std::optional<double> p_avg,
                                          std::size_t v);

struct ClusterConfig {
    SolverConfig solver;         // per-node search parameters
    std::size_t c_max = 500;     // stagnation steps before message handling
    double quiet_period = 30.0;  // coordinator stop timer, seconds
    bool reseed_from_x = true;   // false: reset to p_avg only
    std::optional<double> target_value;  // early stop for tests/benchmarks

    void validate() const;
};

struct NodeResult {
    int node_id = 0;
    bool x_opt = false;
    bool is_global_leader = false;
    Solution local;
    double global_feasible = 0.0;
    bool has_global_feasible = false;
};

/// Per-node search loop: batched generation with adaptation and per-step
/// partial rollback, improvement broadcasting, stagnation-gated adoption
/// of better remote results, and coordinator-driven stop (node 0 owns
/// the quiet-period timer).
NodeResult node_loop(const Problem& problem, const ClusterConfig& config,
                     Transport& transport, int node_id, ClockFn clock = {},
                     const std::atomic<bool>* interrupt = nullptr);

struct ClusterSolution {
    Solution solution;
    int winner_node = -1;
    std::vector<NodeResult> nodes;
};

/// Runs n_nodes node loops on threads over the in-process transport and
/// collects the global solution from the x_opt node.
ClusterSolution cluster_run_in_process(const Problem& problem,
                                       const ClusterConfig& config,
                                       std::size_t n_nodes, ClockFn clock = {},
                                       const std::atomic<bool>* interrupt = nullptr);

}  // namespace miver

#endif  // MIVER_CLUSTER_HPP_
