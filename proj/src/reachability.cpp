#include "invpress/reachability.hpp"

#include "invpress/errors.hpp"
#include "invpress/lp.hpp"

#include <algorithm>
#include <string>

namespace invpress {

ReachSequence::ReachSequence(LinearSystem sys)
    : sys_(std::move(sys)), bu_(linear_image(sys_.U(), sys_.B())) {
    if (sys_.d() > 3) throw DimensionUnsupported("explicit reachable sets need d <= 3; use reach_membership");
}

const ConvexPolytope& ReachSequence::at(int k) {
    if (k < 1) throw PreconditionViolated("horizon must be at least 1");
    if (sets_.empty()) sets_.push_back(bu_);
    while (static_cast<int>(sets_.size()) < k) {
        sets_.push_back(minkowski_sum(bu_, linear_image(sets_.back(), sys_.A())));
    }
    return sets_[static_cast<std::size_t>(k - 1)];
}

ConvexPolytope reach_k(const LinearSystem& sys, int k) {
    ReachSequence seq(sys);
    return seq.at(k);
}

ConvexPolytope control_k(const LinearSystem& sys, int k) { return reach_k(time_reversed(sys), k); }

bool reach_membership(const LinearSystem& sys, const Vector& x, int k, double tol) {
    if (k < 1) throw PreconditionViolated("horizon must be at least 1");
    if (x.size() != sys.d()) throw DimensionMismatch("state has wrong length");
    const Matrix& uv = sys.U().vertices();
    const Eigen::Index d = sys.d(), nv = uv.cols();
    const Eigen::Index weights = nv * k;
    // Variables: convex weights per step, then the residual bound t.
    LpProblem lp;
    lp.objective = Vector::Zero(weights + 1);
    lp.objective(weights) = -1.0;
    lp.lower.assign(static_cast<std::size_t>(weights + 1), 0.0);
    lp.upper.assign(static_cast<std::size_t>(weights + 1), std::nullopt);
    for (int i = 0; i < k; ++i) {
        Vector row = Vector::Zero(weights + 1);
        row.segment(i * nv, nv).setOnes();
        lp.add(row, Relation::Equal, 1.0);
    }
    // Column block i holds A^{k-1-i} B U-vertices.
    Matrix gen(d, weights);
    Matrix power = Matrix::Identity(d, d);
    for (int i = k - 1; i >= 0; --i) {
        gen.middleCols(i * nv, nv) = power * sys.B() * uv;
        power = sys.A() * power;
    }
    const double scale = std::max(1.0, gen.cwiseAbs().maxCoeff());
    for (Eigen::Index r = 0; r < d; ++r) {
        Vector row = Vector::Zero(weights + 1);
        row.head(weights) = gen.row(r).transpose() / scale;
        row(weights) = -1.0;
        lp.add(row, Relation::LessEqual, x(r) / scale);
        row.head(weights) *= -1.0;
        lp.add(row, Relation::LessEqual, -x(r) / scale);
    }
    const LpResult res = lp_solve(lp);
    if (!res.optimal()) return false;
    return res.point(weights) * scale <= tol * std::max(1.0, x.cwiseAbs().maxCoeff());
}

namespace {

// Inradius of the points' hull in its own coordinates (0 for empty or flat sets).
double coordinate_inradius(const Matrix& coords) {
    if (coords.rows() == 0) return 0.0;
    const ConvexPolytope p = ConvexPolytope::from_points(coords);
    if (p.affine_dim() < p.dim()) return 0.0;
    return inradius(p);
}

}  // namespace

double StructureReport::reach_stable_sup() const {
    return reach_stable_norm.empty() ? 0.0 : *std::max_element(reach_stable_norm.begin(), reach_stable_norm.end());
}

double StructureReport::control_unstable_sup() const {
    return control_unstable_norm.empty() ? 0.0 : *std::max_element(control_unstable_norm.begin(), control_unstable_norm.end());
}

StructureReport structure_check(const LinearSystem& sys, const SpectralSplit& split, int k_max) {
    if (!kalman_controllable(sys.A(), sys.B()).controllable) throw NotControllable("(A, B) is not controllable");
    const int d = sys.d(), ds = split.d_s(), dc = split.d_c();
    Matrix t(d, d);
    t << split.basis_s, split.basis_c, split.basis_u;
    const Matrix tinv = t.partialPivLu().inverse();
    // Coordinates in the adapted basis: [s | c | u].
    const auto coords = [&](const ConvexPolytope& p) { return Matrix(tinv * p.vertices()); };
    const Matrix ps = t.leftCols(ds) * tinv.topRows(ds);
    const Matrix& pu = split.projection_u;

    StructureReport report;
    report.k_max = k_max;
    ReachSequence reach(sys);
    ReachSequence control(time_reversed(sys));
    for (int k = 1; k <= k_max; ++k) {
        const ConvexPolytope& r = reach.at(k);
        const ConvexPolytope& c = control.at(k);
        report.reach_stable_norm.push_back(ds == 0 ? 0.0 : (ps * r.vertices()).colwise().norm().maxCoeff());
        report.control_unstable_norm.push_back(split.d_u() == 0 ? 0.0 : (pu * c.vertices()).colwise().norm().maxCoeff());
        report.reach_center_unstable_inradius.push_back(coordinate_inradius(coords(r).bottomRows(d - ds)));
        report.control_stable_center_inradius.push_back(coordinate_inradius(coords(c).topRows(ds + dc)));
    }
    return report;
}

}  // namespace invpress
