#include "invpress/system.hpp"

#include "invpress/errors.hpp"
#include "invpress/lp.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace invpress {

namespace {

// Largest s with s*e and -s*e in conv(U) for every axis e; positive iff 0 is interior.
double axis_margin(const ConvexPolytope& u) {
    const Matrix& v = u.vertices();
    const Eigen::Index m = v.rows(), n = v.cols();
    double margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index axis = 0; axis < m; ++axis) {
        for (double sign : {-1.0, 1.0}) {
            // Variables: convex weights (n), then s.
            LpProblem lp;
            lp.objective = Vector::Zero(n + 1);
            lp.objective(n) = 1.0;
            lp.lower.assign(static_cast<std::size_t>(n + 1), 0.0);
            lp.upper.assign(static_cast<std::size_t>(n + 1), std::nullopt);
            Vector ones = Vector::Zero(n + 1);
            ones.head(n).setOnes();
            lp.add(ones, Relation::Equal, 1.0);
            for (Eigen::Index r = 0; r < m; ++r) {
                Vector row = Vector::Zero(n + 1);
                row.head(n) = v.row(r).transpose();
                if (r == axis) row(n) = -sign;
                lp.add(row, Relation::Equal, 0.0);
            }
            const LpResult res = lp_solve(lp);
            if (!res.optimal()) return 0.0;
            margin = std::min(margin, res.value);
        }
    }
    return margin;
}

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix b, ConvexPolytope u) : a_(std::move(a)), b_(std::move(b)), u_(std::move(u)) {
    if (a_.rows() == 0 || a_.rows() != a_.cols()) throw InvalidSystem("A must be a nonempty square matrix");
    if (b_.rows() != a_.rows() || b_.cols() == 0) throw InvalidSystem("B must have as many rows as A and at least one column");
    if (u_.dim() != b_.cols()) throw InvalidSystem("U must have dimension equal to the number of columns of B");
    if (!a_.allFinite() || !b_.allFinite() || !u_.vertices().allFinite()) throw InvalidSystem("system data must be finite");
    if (std::abs(a_.determinant()) <= 1e-12) throw InvalidSystem("A is singular (|det A| <= 1e-12)");
    const double margin = u_.halfspaces() && u_.affine_dim() == u_.dim() ? interior_margin(u_, Vector::Zero(u_.dim()))
                                                                         : axis_margin(u_);
    if (!(margin >= 1e-9)) throw InvalidSystem("0 must lie in the interior of U");
}

LinearSystem LinearSystem::with_scaled_controls(double factor) const {
    return LinearSystem(a_, b_, linear_image(u_, factor * Matrix::Identity(m(), m())));
}

bool control_in_range(const LinearSystem& sys, const Vector& u, double tol) {
    if (u.size() != sys.m()) throw DimensionMismatch("control has wrong length");
    return contains_point(sys.U(), u, tol);
}

Vector step(const LinearSystem& sys, const Vector& x, const Vector& u) {
    if (x.size() != sys.d()) throw DimensionMismatch("state has wrong length");
    if (!control_in_range(sys, u)) throw ControlOutOfRange("control value outside U");
    return sys.A() * x + sys.B() * u;
}

Trajectory trajectory(const LinearSystem& sys, const Vector& x, const ControlSequence& controls) {
    Trajectory t{x, controls, {x}};
    t.states.reserve(controls.size() + 1);
    for (const Vector& u : controls) t.states.push_back(step(sys, t.states.back(), u));
    return t;
}

Vector solution_formula(const LinearSystem& sys, const Vector& x, const ControlSequence& controls) {
    const auto k = static_cast<int>(controls.size());
    Vector out = Vector::Zero(sys.d());
    Matrix power = Matrix::Identity(sys.d(), sys.d());  // A^{k-1-i}, built from i = k-1 down
    for (int i = k - 1; i >= 0; --i) {
        out += power * sys.B() * controls[static_cast<std::size_t>(i)];
        power = sys.A() * power;
    }
    return out + power * x;
}

LinearSystem time_reversed(const LinearSystem& sys) {
    const Matrix inv = sys.A().inverse();
    return LinearSystem(inv, -inv * sys.B(), sys.U());
}

}  // namespace invpress
