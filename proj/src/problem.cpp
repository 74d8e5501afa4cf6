#include "miver/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace miver {

namespace {

void check_dim(const Problem& problem, const BitVector& x) {
    if (x.size() != problem.dim)
        throw std::invalid_argument("candidate length " +
                                    std::to_string(x.size()) +
                                    " does not match problem dim " +
                                    std::to_string(problem.dim));
}

double second_factor(const Problem& problem, const BitVector& x) {
    const SecondCriterion& c = problem.criterion;
    switch (c.kind) {
        case CriterionKind::Linear:
            return 1.0;
        case CriterionKind::Constant:
            return c.value;
        case CriterionKind::IdleCapacity: {
            // Map the flat vector onto the class-by-channel assignment
            // matrix through the group layout.
            const std::size_t n_class = problem.groups.size();
            const std::size_t n_chan = c.capacities.size();
            std::vector<std::uint8_t> assignment(n_class * n_chan, 0);
            for (std::size_t i = 0; i < n_class; ++i) {
                const Group& g = problem.groups[i];
                for (std::size_t j = 0; j < g.len && j < n_chan; ++j)
                    assignment[i * n_chan + j] = x[g.start + j];
            }
            double occupied =
                idle_capacity_criterion(c.loads, assignment, c.capacities);
            return c.complement ? 1.0 - occupied : occupied;
        }
    }
    return 1.0;
}

double row_lhs(const std::vector<double>& b, const BitVector& x) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (x[i]) lhs += b[i];
    return lhs;
}

// Violation score of a single row. Ratio lhs/bound for positive bounds;
// for bound <= 0 the ratio is undefined, use 1 + (lhs - bound) which is
// positive and monotone in the violation.
double violation_score(double lhs, double bound) {
    if (lhs <= bound) return 0.0;
    if (bound > 0.0) return lhs / bound;
    return 1.0 + (lhs - bound);
}

}  // namespace

void Problem::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (linear_coeffs.size() != dim)
        throw std::invalid_argument("linear_coeffs length must equal dim");
    for (const Constraint& c : constraints)
        if (c.b.size() != dim)
            throw std::invalid_argument("constraint row length must equal dim");
    if (!groups.empty()) {
        const std::size_t v = groups.front().len;
        if (v < 1) throw std::invalid_argument("group length must be >= 1");
        std::vector<std::uint8_t> seen(dim, 0);
        for (const Group& g : groups) {
            if (g.len != v)
                throw std::invalid_argument("groups must have equal length");
            if (g.start + g.len > dim)
                throw std::invalid_argument("group range exceeds dim");
            for (std::size_t i = g.start; i < g.start + g.len; ++i) {
                if (seen[i])
                    throw std::invalid_argument("groups must be disjoint");
                seen[i] = 1;
            }
        }
    }
    if (criterion.kind == CriterionKind::IdleCapacity) {
        if (criterion.capacities.empty())
            throw std::invalid_argument("idle-capacity criterion needs capacities");
        for (double c : criterion.capacities)
            if (c <= 0.0)
                throw std::invalid_argument("channel capacities must be > 0");
        if (criterion.loads.size() != groups.size())
            throw std::invalid_argument(
                "idle-capacity criterion needs one load per group");
    }
}

double evaluate_objective(const Problem& problem, const BitVector& x) {
    check_dim(problem, x);
    double f = 0.0;
    for (std::size_t i = 0; i < problem.dim; ++i)
        if (x[i]) f += problem.linear_coeffs[i];
    if (problem.criterion.kind != CriterionKind::Linear)
        f *= second_factor(problem, x);
    return f;
}

double evaluate_penalty(const Problem& problem, const BitVector& x,
                        double c_penalty) {
    check_dim(problem, x);
    if (c_penalty <= 0.0)
        throw std::invalid_argument("penalty coefficient must be > 0");
    double sum = 0.0;
    for (const Constraint& c : problem.constraints)
        sum += violation_score(row_lhs(c.b, x), c.bound);
    for (const Group& g : problem.groups) {
        double ones = 0.0;
        for (std::size_t i = g.start; i < g.start + g.len; ++i)
            if (x[i]) ones += 1.0;
        sum += violation_score(ones, 1.0);
    }
    return c_penalty * sum;
}

double default_penalty_coefficient(const Problem& problem) {
    double s = 0.0;
    for (double a : problem.linear_coeffs) s += std::fabs(a);
    return s;
}

double effective_penalty_coefficient(const Problem& problem) {
    double s = default_penalty_coefficient(problem);
    return s > 0.0 ? s : 1.0;
}

Candidate evaluate_modified(const Problem& problem, const BitVector& x,
                            double c_penalty) {
    Candidate cand;
    cand.x = x;
    cand.f = evaluate_objective(problem, x);
    cand.f_p = evaluate_penalty(problem, x, c_penalty);
    cand.f_m = cand.f - cand.f_p;
    return cand;
}

bool is_feasible(const Problem& problem, const BitVector& x) {
    check_dim(problem, x);
    for (const Constraint& c : problem.constraints)
        if (row_lhs(c.b, x) > c.bound) return false;
    for (const Group& g : problem.groups) {
        std::size_t ones = 0;
        for (std::size_t i = g.start; i < g.start + g.len; ++i)
            if (x[i]) ++ones;
        if (ones > 1) return false;
    }
    return true;
}

double idle_capacity_criterion(const std::vector<double>& loads,
                               const std::vector<std::uint8_t>& assignment,
                               const std::vector<double>& capacities) {
    const std::size_t n_chan = capacities.size();
    double total_cap = std::accumulate(capacities.begin(), capacities.end(), 0.0);
    if (total_cap <= 0.0)
        throw std::invalid_argument("total channel capacity must be > 0");
    double used = 0.0;
    for (std::size_t j = 0; j < n_chan; ++j) {
        double load_j = 0.0;
        for (std::size_t i = 0; i < loads.size(); ++i)
            if (assignment[i * n_chan + j]) load_j += loads[i];
        used += std::min(load_j, capacities[j]);
    }
    return used / total_cap;
}

std::string bits_to_string(const BitVector& x) {
    std::string s(x.size(), '0');
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i]) s[i] = '1';
    return s;
}

BitVector bits_from_string(const std::string& s) {
    BitVector x(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1')
            throw std::invalid_argument("bit string must contain only 0/1");
        x[i] = s[i] == '1' ? 1 : 0;
    }
    return x;
}

}  // namespace miver
