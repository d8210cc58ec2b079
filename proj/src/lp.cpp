#include "invpress/lp.hpp"

#include "invpress/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace invpress {

namespace {

// How an original variable is expressed through nonnegative tableau columns.
struct VariableMap {
    enum Kind { Shifted, Mirrored, Split } kind = Split;
    Eigen::Index column = 0;  // x = base + col, base - col, or col - col2
    Eigen::Index column2 = -1;
    double base = 0.0;
};

class Tableau {
public:
    Tableau(Eigen::Index rows, Eigen::Index columns) : t_(Matrix::Zero(rows, columns + 1)), cost_row_(Vector::Zero(columns + 1)), basis_(rows, -1) {}

    Matrix& t() { return t_; }
    std::vector<Eigen::Index>& basis() { return basis_; }
    Eigen::Index rows() const { return t_.rows(); }
    Eigen::Index columns() const { return t_.cols() - 1; }
    double rhs(Eigen::Index r) const { return t_(r, columns()); }

    void set_costs(const Vector& costs) {
        cost_row_.setZero();
        cost_row_.head(columns()) = costs;
        for (Eigen::Index r = 0; r < rows(); ++r) {
            const double cb = costs(basis_[r]);
            if (cb != 0.0) cost_row_ -= cb * t_.row(r).transpose();
        }
    }

    double value() const { return -cost_row_(columns()); }

    void pivot(Eigen::Index r, Eigen::Index s) {
        t_.row(r) /= t_(r, s);
        for (Eigen::Index i = 0; i < rows(); ++i) {
            if (i == r) continue;
            const double f = t_(i, s);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        const double f = cost_row_(s);
        if (f != 0.0) cost_row_ -= f * t_.row(r).transpose();
        t_(r, s) = 1.0;
        basis_[r] = s;
    }

    enum class Outcome { Optimal, Unbounded };

    // Maximizes the current cost row over columns flagged in `allowed`.
    Outcome optimize(const std::vector<bool>& allowed, const LpOptions& options, int& pivots) {
        const double tol = options.tolerance;
        int degenerate_streak = 0;
        bool bland = false;
        for (;;) {
            Eigen::Index entering = -1;
            double best = tol;
            for (Eigen::Index j = 0; j < columns(); ++j) {
                if (!allowed[j]) continue;
                const double r = cost_row_(j);
                if (r > tol) {
                    if (bland) {
                        entering = j;
                        break;
                    }
                    if (r > best) {
                        best = r;
                        entering = j;
                    }
                }
            }
            if (entering < 0) return Outcome::Optimal;

            Eigen::Index leaving = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows(); ++i) {
                const double a = t_(i, entering);
                if (a <= tol) continue;
                const double q = std::max(rhs(i), 0.0) / a;
                if (leaving < 0 || q < ratio - tol) {
                    ratio = q;
                    leaving = i;
                } else if (q <= ratio + tol) {
                    const bool prefer = bland ? basis_[i] < basis_[leaving] : a > t_(leaving, entering);
                    if (prefer) {
                        ratio = std::min(ratio, q);
                        leaving = i;
                    }
                }
            }
            if (leaving < 0) return Outcome::Unbounded;

            if (++pivots > options.max_pivots) {
                throw CycleLimit("simplex exceeded " + std::to_string(options.max_pivots) + " pivots");
            }
            degenerate_streak = ratio <= tol ? degenerate_streak + 1 : 0;
            if (degenerate_streak >= options.degenerate_switch) bland = true;
            pivot(leaving, entering);
        }
    }

private:
    Matrix t_;
    Vector cost_row_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

LpResult lp_solve(const LpProblem& problem, const LpOptions& options) {
    const Eigen::Index n = problem.num_variables();
    const double tol = options.tolerance;
    const auto bound = [](const std::vector<std::optional<double>>& b, Eigen::Index j) -> std::optional<double> {
        return b.empty() ? std::nullopt : b[static_cast<std::size_t>(j)];
    };
    if ((!problem.lower.empty() && static_cast<Eigen::Index>(problem.lower.size()) != n) ||
        (!problem.upper.empty() && static_cast<Eigen::Index>(problem.upper.size()) != n)) {
        throw DimensionMismatch("LP bound vectors must match the number of variables");
    }
    for (const auto& c : problem.constraints) {
        if (c.coefficients.size() != n) throw DimensionMismatch("LP constraint has wrong length");
    }

    // Map original variables onto nonnegative columns.
    std::vector<VariableMap> maps(static_cast<std::size_t>(n));
    Eigen::Index columns = 0;
    std::vector<std::pair<Eigen::Index, double>> upper_rows;  // column <= value
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto lo = bound(problem.lower, j);
        const auto hi = bound(problem.upper, j);
        auto& map = maps[static_cast<std::size_t>(j)];
        if (lo && hi && *lo > *hi + tol) return {LpStatus::Infeasible, Vector(), 0.0};
        if (lo) {
            map = {VariableMap::Shifted, columns++, -1, *lo};
            if (hi) upper_rows.emplace_back(map.column, *hi - *lo);
        } else if (hi) {
            map = {VariableMap::Mirrored, columns++, -1, *hi};
        } else {
            map = {VariableMap::Split, columns, columns + 1, 0.0};
            columns += 2;
        }
    }

    struct Row {
        Vector a;
        bool equality;
        double b;
    };
    std::vector<Row> rows;
    rows.reserve(problem.constraints.size() + upper_rows.size());
    for (const auto& c : problem.constraints) {
        Row row{Vector::Zero(columns), c.relation == Relation::Equal, c.rhs};
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = c.coefficients(j);
            if (a == 0.0) continue;
            const auto& map = maps[static_cast<std::size_t>(j)];
            switch (map.kind) {
            case VariableMap::Shifted:
                row.a(map.column) += a;
                row.b -= a * map.base;
                break;
            case VariableMap::Mirrored:
                row.a(map.column) -= a;
                row.b -= a * map.base;
                break;
            case VariableMap::Split:
                row.a(map.column) += a;
                row.a(map.column2) -= a;
                break;
            }
        }
        rows.push_back(std::move(row));
    }
    for (const auto& [col, value] : upper_rows) {
        Row row{Vector::Zero(columns), false, value};
        row.a(col) = 1.0;
        rows.push_back(std::move(row));
    }

    // Column layout: structural | slacks | artificials.
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::Index slack_count = 0;
    for (const auto& r : rows) slack_count += r.equality ? 0 : 1;
    std::vector<bool> needs_artificial(rows.size(), false);
    Eigen::Index artificial_count = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].equality || rows[i].b < 0.0) {
            needs_artificial[i] = true;
            ++artificial_count;
        }
    }
    const Eigen::Index total = columns + slack_count + artificial_count;
    Tableau tab(m, total);
    Eigen::Index slack = columns;
    Eigen::Index artificial = columns + slack_count;
    double rhs_scale = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        const double sign = row.b < 0.0 ? -1.0 : 1.0;
        tab.t().row(i).head(columns) = sign * row.a.transpose();
        tab.t()(i, total) = sign * row.b;
        rhs_scale = std::max(rhs_scale, std::abs(row.b));
        if (!row.equality) {
            tab.t()(i, slack) = sign;
            if (sign > 0.0) tab.basis()[static_cast<std::size_t>(i)] = slack;
            ++slack;
        }
        if (needs_artificial[static_cast<std::size_t>(i)]) {
            tab.t()(i, artificial) = 1.0;
            tab.basis()[static_cast<std::size_t>(i)] = artificial;
            ++artificial;
        }
    }

    int pivots = 0;
    std::vector<bool> allowed(static_cast<std::size_t>(total), true);
    const Eigen::Index first_artificial = columns + slack_count;
    if (artificial_count > 0) {
        Vector phase1 = Vector::Zero(total);
        phase1.tail(artificial_count).setConstant(-1.0);
        tab.set_costs(phase1);
        tab.optimize(allowed, options, pivots);
        if (tab.value() < -tol * rhs_scale * 10.0) return {LpStatus::Infeasible, Vector(), 0.0};
        // Drive zero-level artificials out of the basis where possible.
        for (Eigen::Index i = 0; i < m; ++i) {
            if (tab.basis()[static_cast<std::size_t>(i)] < first_artificial) continue;
            Eigen::Index best = -1;
            double magnitude = tol;
            for (Eigen::Index j = 0; j < first_artificial; ++j) {
                if (std::abs(tab.t()(i, j)) > magnitude) {
                    magnitude = std::abs(tab.t()(i, j));
                    best = j;
                }
            }
            if (best >= 0) tab.pivot(i, best);
        }
        for (Eigen::Index j = first_artificial; j < total; ++j) allowed[static_cast<std::size_t>(j)] = false;
    }

    Vector costs = Vector::Zero(total);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double c = problem.objective(j);
        const auto& map = maps[static_cast<std::size_t>(j)];
        switch (map.kind) {
        case VariableMap::Shifted:
            costs(map.column) += c;
            break;
        case VariableMap::Mirrored:
            costs(map.column) -= c;
            break;
        case VariableMap::Split:
            costs(map.column) += c;
            costs(map.column2) -= c;
            break;
        }
    }
    tab.set_costs(costs);
    if (tab.optimize(allowed, options, pivots) == Tableau::Outcome::Unbounded) {
        return {LpStatus::Unbounded, Vector(), 0.0};
    }

    Vector y = Vector::Zero(total);
    for (Eigen::Index i = 0; i < m; ++i) y(tab.basis()[static_cast<std::size_t>(i)]) = std::max(tab.rhs(i), 0.0);
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& map = maps[static_cast<std::size_t>(j)];
        switch (map.kind) {
        case VariableMap::Shifted: x(j) = map.base + y(map.column); break;
        case VariableMap::Mirrored: x(j) = map.base - y(map.column); break;
        case VariableMap::Split: x(j) = y(map.column) - y(map.column2); break;
        }
    }
    return {LpStatus::Optimal, x, problem.objective.dot(x)};
}

}  // namespace invpress
