#pragma once

#include "invpress/polytope.hpp"
#include "invpress/spectral.hpp"
#include "invpress/system.hpp"

#include <vector>

namespace invpress {

struct ControlSetApprox {
    int horizon = 0;
    ConvexPolytope inner;        // R_k(0) intersected with C_k(0)
    bool bounded_prediction = false;
    bool converged = false;
    double last_delta = 0.0;     // Hausdorff change between the last two horizons
    bool unbounded_growth = false;  // inradius increased over each of the last 5 steps
    std::vector<double> deltas;     // per horizon, starting at the second computed one
    std::vector<double> inradii;    // per horizon
    int first_horizon = 0;
};

/// Sweeps k = d, d+1, ... until the Hausdorff change stays below conv_tol for
/// two consecutive steps or k reaches k_max (d <= 3).
ControlSetApprox approximate_control_set(const LinearSystem& sys, const SpectralSplit& split, int k_max,
                                         double conv_tol);

/// Fixed point (I - A)^{-1} B u of the constant control u.
Vector equilibrium(const LinearSystem& sys, const Vector& u);

struct InteriorCheck {
    bool interior = false;
    double min_margin = 0.0;
};

/// Observes whether x_1 .. x_tau stay strictly inside D (d <= 3).
InteriorCheck interior_trajectory_check(const LinearSystem& sys, const ConvexPolytope& d, const Vector& x,
                                        const ControlSequence& controls);

/// D is bounded exactly when A is hyperbolic.
bool boundedness_classifier(const SpectralSplit& split);

}  // namespace invpress
