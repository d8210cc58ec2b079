#include "invpress/control_set.hpp"

#include "invpress/errors.hpp"
#include "invpress/reachability.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace invpress {

ControlSetApprox approximate_control_set(const LinearSystem& sys, const SpectralSplit& split, int k_max,
                                         double conv_tol) {
    if (!kalman_controllable(sys.A(), sys.B()).controllable) throw NotControllable("(A, B) is not controllable");
    if (sys.d() > 3) throw DimensionUnsupported("control-set approximation needs d <= 3");
    const int start = sys.d();
    if (k_max < start) throw PreconditionViolated("horizon must be at least the state dimension");

    ReachSequence reach(sys);
    ReachSequence control(time_reversed(sys));
    ControlSetApprox out{start, intersect(reach.at(start), control.at(start)), false, false, 0.0, false, {}, {}, start};
    out.bounded_prediction = is_hyperbolic(split);
    out.first_horizon = start;
    out.inradii.push_back(inradius(out.inner));
    out.last_delta = std::numeric_limits<double>::infinity();
    int below = 0;
    for (int k = start + 1; k <= k_max; ++k) {
        ConvexPolytope next = intersect(reach.at(k), control.at(k));
        out.last_delta = hausdorff_distance(out.inner, next);
        out.deltas.push_back(out.last_delta);
        out.inner = std::move(next);
        out.horizon = k;
        out.inradii.push_back(inradius(out.inner));
        below = out.last_delta < conv_tol ? below + 1 : 0;
        if (below >= 2) {
            out.converged = true;
            break;
        }
    }
    const std::size_t n = out.inradii.size();
    if (!out.converged && n >= 6) {
        out.unbounded_growth = true;
        for (std::size_t i = n - 5; i < n; ++i) {
            if (!(out.inradii[i] > out.inradii[i - 1])) out.unbounded_growth = false;
        }
    }
    return out;
}

Vector equilibrium(const LinearSystem& sys, const Vector& u) {
    if (!control_in_range(sys, u)) throw ControlOutOfRange("control value outside U");
    const Matrix shift = Matrix::Identity(sys.d(), sys.d()) - sys.A();
    Eigen::FullPivLU<Matrix> lu(shift);
    lu.setThreshold(1e-9);
    if (!lu.isInvertible()) throw SingularShift("I - A is singular (A has eigenvalue 1)");
    return lu.solve(sys.B() * u);
}

InteriorCheck interior_trajectory_check(const LinearSystem& sys, const ConvexPolytope& d, const Vector& x,
                                        const ControlSequence& controls) {
    if (interior_margin(d, x) < 1e-6) throw PreconditionViolated("start state is not interior to D (margin < 1e-6)");
    const Trajectory t = trajectory(sys, x, controls);
    InteriorCheck out{true, std::numeric_limits<double>::infinity()};
    for (std::size_t k = 1; k < t.states.size(); ++k) {
        const double margin = interior_margin(d, t.states[k]);
        if (margin < -1e-9) throw PreconditionViolated("state " + std::to_string(k) + " leaves D");
        out.min_margin = std::min(out.min_margin, margin);
    }
    out.interior = out.min_margin > 0.0;
    return out;
}

bool boundedness_classifier(const SpectralSplit& split) { return is_hyperbolic(split); }

}  // namespace invpress
