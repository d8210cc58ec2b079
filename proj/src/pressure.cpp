#include "invpress/pressure.hpp"

#include "invpress/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace invpress {

namespace {

void require_formula_preconditions(const LinearSystem& sys, const SpectralSplit& split) {
    if (!is_hyperbolic(split)) throw NotHyperbolic("A has eigenvalues on the unit circle; the formula needs hyperbolic A");
    if (!kalman_controllable(sys.A(), sys.B()).controllable) throw NotControllable("(A, B) is not controllable");
}

// Interior margin of a control in U, or +inf-like acceptance when U has no halfspaces.
double control_margin(const ConvexPolytope& u, const Vector& c) {
    if (u.halfspaces()) return interior_margin(u, c);
    return contains_point(u, c, 0.0) ? 0.0 : -1.0;
}

double average_potential(const Potential& p, const LinearSystem& sys, const Vector& x, const ControlSequence& u) {
    return birkhoff_sum(p, sys, x, u) / static_cast<double>(u.size());
}

}  // namespace

PressureResult invariance_pressure_formula(const LinearSystem& sys, const SpectralSplit& split, const Potential& p,
                                           int grid, int refine_iters) {
    require_formula_preconditions(sys, split);
    if (p.uses_state()) throw PreconditionViolated("the pressure formula needs a control-only potential");
    const Minimum min = minimize_over_U(p, sys.U(), grid, refine_iters);
    PressureResult r;
    r.log_unstable_det = unstable_log_det(split);
    r.entropy = r.log_unstable_det;
    r.min_potential = min.value;
    r.pressure = r.log_unstable_det + min.value;
    r.argmin_control = min.argmin;
    r.empty_grid = min.empty_grid;
    return r;
}

double invariance_entropy_formula(const LinearSystem& sys, const SpectralSplit& split) {
    require_formula_preconditions(sys, split);
    return unstable_log_det(split);
}

Trajectory periodic_orbit(const LinearSystem& sys, const ControlSequence& u_periodic) {
    if (u_periodic.empty()) throw PreconditionViolated("periodic control needs at least one value");
    const int d = sys.d();
    Matrix power = Matrix::Identity(d, d);
    for (std::size_t i = 0; i < u_periodic.size(); ++i) power = sys.A() * power;
    const Matrix shift = Matrix::Identity(d, d) - power;
    const Eigen::JacobiSVD<Matrix> svd(shift);
    const Vector sv = svd.singularValues();
    if (sv(d - 1) == 0.0 || sv(0) / sv(d - 1) > 1e12) {
        throw SingularShift("I - A^tau is nearly singular (condition > 1e12)");
    }
    const Vector rhs = solution_formula(sys, Vector::Zero(d), u_periodic);
    const Vector x = shift.partialPivLu().solve(rhs);
    return trajectory(sys, x, u_periodic);
}

PeriodicBound upper_bound_via_periodic(const LinearSystem& sys, const SpectralSplit& split, const ConvexPolytope& d,
                                       const Potential& p, int tau_max, int samples, std::uint64_t seed) {
    require_formula_preconditions(sys, split);
    const ConvexPolytope& u = sys.U();
    const Matrix& verts = u.vertices();
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);

    PeriodicBound out;
    out.bound = std::numeric_limits<double>::infinity();
    out.average = std::numeric_limits<double>::infinity();

    std::optional<Vector> argmin;
    if (!p.uses_state()) argmin = minimize_over_U(p, u).argmin;

    const auto consider = [&](const ControlSequence& controls) {
        ++out.candidates;
        for (const Vector& c : controls) {
            if (!(control_margin(u, c) > 0.0) && u.halfspaces()) return;
            if (!u.halfspaces() && control_margin(u, c) < 0.0) return;
        }
        Trajectory orbit;
        try {
            orbit = periodic_orbit(sys, controls);
        } catch (const SingularShift&) {
            return;
        }
        for (const Vector& x : orbit.states) {
            if (!(interior_margin(d, x) > 0.0)) return;
        }
        ++out.admissible;
        const double avg = average_potential(p, sys, orbit.start, controls);
        if (avg < out.average) {
            out.found = true;
            out.average = avg;
            out.tau = static_cast<int>(controls.size());
            out.controls = controls;
            out.start = orbit.start;
        }
    };

    for (int tau = std::max(1, sys.d()); tau <= tau_max; ++tau) {
        const auto t = static_cast<std::size_t>(tau);
        consider(ControlSequence(t, Vector::Zero(sys.m())));
        if (argmin) {
            for (double eta : {1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1}) consider(ControlSequence(t, (1.0 - eta) * *argmin));
        }
        // Coordinate-extreme patterns: pulled-in vertices, constant and alternating.
        for (Eigen::Index i = 0; i < verts.cols(); ++i) {
            const Vector a = (1.0 - 1e-3) * verts.col(i);
            consider(ControlSequence(t, a));
            const Vector b = (1.0 - 1e-3) * verts.col((i + 1) % verts.cols());
            ControlSequence alt;
            for (std::size_t k = 0; k < t; ++k) alt.push_back(k % 2 == 0 ? a : b);
            consider(alt);
        }
        for (int s = 0; s < samples; ++s) {
            ControlSequence random;
            for (std::size_t k = 0; k < t; ++k) {
                Vector w(verts.cols());
                for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = expo(rng);
                random.push_back(verts * (w / w.sum()));
            }
            consider(random);
        }
    }
    if (out.found) out.bound = unstable_log_det(split) + out.average;
    return out;
}

long long lyapunov_count(double rho, double xi, int tau) {
    if (rho < 1.0) return 1;
    const double v = std::floor(std::pow(rho + xi, tau));
    if (!(v < 9e15)) throw BudgetExceeded("M_j(tau) overflows");
    return static_cast<long long>(v) + 1;
}

std::vector<double> SpanningSet::weights() const {
    std::vector<double> w;
    w.reserve(log_weights.size());
    for (double s : log_weights) w.push_back(std::exp(s));
    return w;
}

double log_sum_exp_rate(const std::vector<double>& exponents, int tau) {
    if (exponents.empty()) throw PreconditionViolated("empty spanning set");
    const double top = *std::max_element(exponents.begin(), exponents.end());
    double sum = 0.0;
    for (double s : exponents) sum += std::exp(s - top);
    return (top + std::log(sum)) / tau;
}

double spanning_rate(const SpanningSet& ss) { return log_sum_exp_rate(ss.log_weights, ss.tau); }

SpanningSet spanning_construction(const LinearSystem& sys, const SpectralSplit& split, const ConvexPolytope& dset,
                                  const SpanningConstructionConfig& cfg, const Potential& p) {
    require_formula_preconditions(sys, split);
    const int d = sys.d(), mc = sys.m();
    if (cfg.tau0 < d) throw PreconditionViolated("tau0 must be at least the state dimension");
    if (cfg.m < 1) throw PreconditionViolated("m must be positive");
    if (!(cfg.xi > 0.0)) throw PreconditionViolated("xi must be positive");
    if (!(cfg.delta > 0.0 && cfg.delta < cfg.xi)) throw PreconditionViolated("delta must lie in (0, xi)");
    for (const auto& g : split.lyapunov_groups) {
        if (g.rho < 1.0 && !(g.rho + cfg.xi < 1.0)) {
            throw PreconditionViolated("xi too large: rho_j < 1 must imply rho_j + xi < 1");
        }
    }
    const Halfspaces& dh = dset.require_halfspaces();
    const int tau0 = cfg.tau0, tau = cfg.m * cfg.tau0;

    ControlSequence u0 = cfg.u0.empty() ? ControlSequence(static_cast<std::size_t>(tau0), Vector::Zero(mc)) : cfg.u0;
    if (static_cast<int>(u0.size()) != tau0) throw PreconditionViolated("u0 must hold tau0 control values");
    for (const Vector& c : u0) {
        if (c.size() != mc) throw DimensionMismatch("u0 entry has wrong length");
        if (!(control_margin(sys.U(), c) > 0.0) && sys.U().halfspaces()) {
            throw PreconditionViolated("u0 values must lie in the interior of U");
        }
    }
    const Trajectory orbit = periodic_orbit(sys, u0);
    const Vector x0 = orbit.start;
    if (cfg.x0 && ((*cfg.x0 - x0).norm() > 1e-9 * (1.0 + x0.norm()))) {
        throw PreconditionViolated("x0 is not the periodic state of u0");
    }

    // Cube coordinates: orthonormal bases of the Lyapunov spaces side by side.
    Matrix t(d, d);
    std::vector<long long> coord_count;
    SpanningSet ss;
    ss.tau = tau;
    ss.x0 = x0;
    {
        Eigen::Index col = 0;
        for (const auto& g : split.lyapunov_groups) {
            const long long count = lyapunov_count(g.rho, cfg.xi, tau);
            ss.counts.push_back(count);
            t.middleCols(col, g.dim) = g.basis;
            for (int i = 0; i < g.dim; ++i) coord_count.push_back(count);
            col += g.dim;
        }
    }
    ss.cube_basis = t;
    double total = 1.0;
    for (long long c : coord_count) total *= static_cast<double>(c);
    if (total > 2e6) throw BudgetExceeded("spanning set would hold " + std::to_string(total) + " controls");
    const Matrix tinv = t.inverse();

    // Minimum-norm steering: stacked controls (u_0..u_{tau0-1}) = G * c for unit cube coordinates c.
    std::vector<Matrix> apow(static_cast<std::size_t>(tau + 1));
    apow[0] = Matrix::Identity(d, d);
    for (int k = 1; k <= tau; ++k) apow[static_cast<std::size_t>(k)] = sys.A() * apow[static_cast<std::size_t>(k - 1)];
    Matrix w(d, tau0 * mc);
    for (int i = 0; i < tau0; ++i) w.middleCols(i * mc, mc) = apow[static_cast<std::size_t>(tau0 - 1 - i)] * sys.B();
    const Matrix g = -w.completeOrthogonalDecomposition().pseudoInverse() * apow[static_cast<std::size_t>(tau0)] * t;

    // Unit-scale subcuboid centers and half-widths.
    std::vector<Vector> centers;
    {
        std::vector<long long> idx(static_cast<std::size_t>(d), 0);
        for (;;) {
            Vector c(d);
            for (int i = 0; i < d; ++i) {
                const auto n = static_cast<double>(coord_count[static_cast<std::size_t>(i)]);
                c(i) = (2.0 * static_cast<double>(idx[static_cast<std::size_t>(i)]) + 1.0) / n - 1.0;
            }
            centers.push_back(c);
            int pos = 0;
            while (pos < d && ++idx[static_cast<std::size_t>(pos)] == coord_count[static_cast<std::size_t>(pos)]) {
                idx[static_cast<std::size_t>(pos++)] = 0;
            }
            if (pos == d) break;
        }
    }
    Vector half(d);
    for (int i = 0; i < d; ++i) half(i) = 1.0 / static_cast<double>(coord_count[static_cast<std::size_t>(i)]);

    // Deviation of state k from the periodic orbit for unit b0: L_k c + A^k T (z - c).
    std::vector<Matrix> lk(static_cast<std::size_t>(tau + 1));
    for (int k = 0; k <= tau; ++k) {
        Matrix l = apow[static_cast<std::size_t>(k)] * t;
        for (int i = 0; i < std::min(k, tau0); ++i) {
            l += apow[static_cast<std::size_t>(k - 1 - i)] * sys.B() * g.middleRows(i * mc, mc);
        }
        lk[static_cast<std::size_t>(k)] = l;
    }

    // Every constraint reads b0 * s <= slack; b0 is the tightest ratio.
    double b_state = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= tau; ++k) {
        const Vector base = orbit.states[static_cast<std::size_t>(k % tau0)];
        const Matrix at = apow[static_cast<std::size_t>(k)] * t;
        for (Eigen::Index f = 0; f < dh.size(); ++f) {
            const Vector n = dh.normals.row(f).transpose();
            const double slack = dh.offsets(f) - n.dot(base);
            if (slack <= 0.0) throw CubeNotInD("the periodic orbit touches the boundary of D");
            const Vector nl = lk[static_cast<std::size_t>(k)].transpose() * n;
            double s = 0.0;
            for (const Vector& c : centers) s = std::max(s, nl.dot(c));
            s += ((at.transpose() * n).cwiseAbs().array() * half.array()).sum();
            if (s > 0.0) b_state = std::min(b_state, slack / s);
        }
    }
    double b_control = std::numeric_limits<double>::infinity();
    if (const auto& uh = sys.U().halfspaces()) {
        for (int i = 0; i < tau0; ++i) {
            const Matrix gi = g.middleRows(i * mc, mc);
            for (Eigen::Index f = 0; f < uh->size(); ++f) {
                const Vector n = uh->normals.row(f).transpose();
                const double slack = uh->offsets(f) - 1e-6 - n.dot(u0[static_cast<std::size_t>(i)]);
                if (slack <= 0.0) throw SteeringOutOfRange("u0 lies within 1e-6 of the boundary of U");
                const Vector ng = gi.transpose() * n;
                double s = 0.0;
                for (const Vector& c : centers) s = std::max(s, ng.dot(c));
                if (s > 0.0) b_control = std::min(b_control, slack / s);
            }
        }
    }
    const double b_max = std::min(b_state, b_control) * (1.0 - 1e-6);
    if (cfg.b0) {
        if (!(*cfg.b0 > 0.0)) throw PreconditionViolated("b0 must be positive");
        if (*cfg.b0 > b_control) throw SteeringOutOfRange("b0 too large: a steering control leaves U");
        if (*cfg.b0 > b_state) throw CubeNotInD("b0 too large: the cube or a trajectory from it leaves D");
        ss.b0 = *cfg.b0;
    } else {
        if (!std::isfinite(b_max) || b_max <= 0.0) throw CubeNotInD("no cube around x0 fits in D");
        ss.b0 = b_max;
    }

    // Return to the cube: |T^{-1} A^tau T (z - c)|_inf <= 1 in unit coordinates.
    const Matrix back = tinv * apow[static_cast<std::size_t>(tau)] * t;
    ss.returns_to_cube = ((back.cwiseAbs() * half).array() <= 1.0 + 1e-12).all();

    ss.control_margin = std::numeric_limits<double>::infinity();
    ss.controls.reserve(centers.size());
    ss.log_weights.reserve(centers.size());
    for (const Vector& c : centers) {
        const Vector stacked = ss.b0 * (g * c);
        ControlSequence seq;
        seq.reserve(static_cast<std::size_t>(tau));
        for (int k = 0; k < tau; ++k) {
            Vector v = u0[static_cast<std::size_t>(k % tau0)];
            if (k < tau0) v += stacked.segment(k * mc, mc);
            if (sys.U().halfspaces()) ss.control_margin = std::min(ss.control_margin, interior_margin(sys.U(), v));
            seq.push_back(std::move(v));
        }
        ss.log_weights.push_back(birkhoff_sum(p, sys, x0 + t * (ss.b0 * c), seq));
        ss.controls.push_back(std::move(seq));
    }

    // Sampled re-simulation: random cube points with their cell's control.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int s = 0; s < cfg.validation_samples; ++s) {
        Vector z(d);
        std::size_t cell = 0, stride = 1;
        for (int i = 0; i < d; ++i) {
            z(i) = unit(rng);
            const auto n = coord_count[static_cast<std::size_t>(i)];
            const auto k = std::min<long long>(n - 1, static_cast<long long>((z(i) + 1.0) / 2.0 * static_cast<double>(n)));
            cell += static_cast<std::size_t>(k) * stride;
            stride *= static_cast<std::size_t>(n);
        }
        const Trajectory tr = trajectory(sys, x0 + t * (ss.b0 * z), ss.controls[cell]);
        bool ok = true;
        for (const Vector& x : tr.states) ok = ok && interior_margin(dset, x) >= -1e-9;
        const Vector rel = tinv * (tr.states.back() - x0);
        ok = ok && rel.cwiseAbs().maxCoeff() <= ss.b0 * (1.0 + 1e-9);
        ++ss.samples_checked;
        if (!ok) ++ss.sample_violations;
    }
    return ss;
}

}  // namespace invpress
