#ifndef MIVER_PROBLEM_HPP_
#define MIVER_PROBLEM_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace miver {

using BitVector = std::vector<std::uint8_t>;

/// One linear constraint row: sum_i b[i]*x[i] <= bound.
struct Constraint {
    std::vector<double> b;
    double bound = 0.0;
};

/// Contiguous index range [start, start+len) holding the variants of one
/// element; at most one variable in the range may be set.
struct Group {
    std::size_t start = 0;
    std::size_t len = 0;
};

enum class CriterionKind {
    Linear,       // F(X) = sum a_i x_i
    Constant,     // F(X) = (sum a_i x_i) * value
    IdleCapacity  // F(X) = (sum a_i x_i) * channel-utilization factor
};

/// Second-criterion configuration for the multiplicative composition.
/// For IdleCapacity the variable layout is the group layout: group l is
/// traffic class l, variant j of the group routes the class through
/// channel j. `complement` selects 1 - utilization (the idle fraction)
/// instead of the occupied fraction; both orientations are exposed since
/// either may be the quantity a caller wants to reward.
struct SecondCriterion {
    CriterionKind kind = CriterionKind::Linear;
    double value = 1.0;              // Constant
    std::vector<double> loads;       // IdleCapacity: per-class load
    std::vector<double> capacities;  // IdleCapacity: per-channel capacity
    bool complement = false;
};

/// Constrained pseudo-Boolean problem in canonical maximize form.
/// Immutable after construction; safe to share across threads.
struct Problem {
    std::size_t dim = 0;
    std::vector<double> linear_coeffs;
    std::vector<Constraint> constraints;
    std::vector<Group> groups;
    SecondCriterion criterion;

    /// Validates the structural invariants; throws std::invalid_argument.
    void validate() const;

    std::size_t variants_per_group() const {
        return groups.empty() ? 0 : groups.front().len;
    }
};

/// One sampled point with its objective, penalty and modified objective.
struct Candidate {
    BitVector x;
    double f = 0.0;    // objective
    double f_p = 0.0;  // penalty, 0 iff feasible
    double f_m = 0.0;  // modified objective, f - f_p
};

double evaluate_objective(const Problem& problem, const BitVector& x);

double evaluate_penalty(const Problem& problem, const BitVector& x,
                        double c_penalty);

/// Sum of |a_i|; a caller seeing 0 must substitute a positive fallback.
double default_penalty_coefficient(const Problem& problem);

/// default_penalty_coefficient with the zero-objective fallback of 1 applied.
double effective_penalty_coefficient(const Problem& problem);

Candidate evaluate_modified(const Problem& problem, const BitVector& x,
                            double c_penalty);

/// True iff x satisfies every constraint row and every group bound.
/// Independent of the penalty path (direct <= checks).
bool is_feasible(const Problem& problem, const BitVector& x);

/// Fraction of total channel capacity in use: sum_j min(load_j, c_j) / sum_j c_j.
/// `assignment` is row-major, one row per class, one column per channel.
double idle_capacity_criterion(const std::vector<double>& loads,
                               const std::vector<std::uint8_t>& assignment,
                               const std::vector<double>& capacities);

std::string bits_to_string(const BitVector& x);
BitVector bits_from_string(const std::string& s);

}  // namespace miver

#endif  // MIVER_PROBLEM_HPP_
