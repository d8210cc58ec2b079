#pragma once

#include "invpress/types.hpp"

#include <optional>
#include <vector>

namespace invpress {

enum class Relation { LessEqual, Equal };

struct LpConstraint {
    Vector coefficients;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// maximize objective·x subject to the constraints and per-variable bounds.
/// A missing bound (or an empty bound vector) means the variable is unbounded
/// on that side.
struct LpProblem {
    Vector objective;
    std::vector<LpConstraint> constraints;
    std::vector<std::optional<double>> lower;
    std::vector<std::optional<double>> upper;

    Eigen::Index num_variables() const { return objective.size(); }

    void add(Vector coefficients, Relation relation, double rhs) {
        constraints.push_back({std::move(coefficients), relation, rhs});
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vector point;
    double value = 0.0;

    bool optimal() const { return status == LpStatus::Optimal; }
};

struct LpOptions {
    double tolerance = 1e-9;
    // Dantzig pricing is used until this many consecutive degenerate pivots,
    // then Bland's rule takes over for the rest of the solve.
    int degenerate_switch = 50;
    int max_pivots = 100000;
};

/// Dense two-phase tableau simplex. Throws CycleLimit when the pivot cap is hit
/// and DimensionMismatch on malformed problems.
LpResult lp_solve(const LpProblem& problem, const LpOptions& options = {});

}  // namespace invpress
