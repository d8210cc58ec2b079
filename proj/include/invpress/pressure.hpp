#pragma once

#include "invpress/polytope.hpp"
#include "invpress/potential.hpp"
#include "invpress/spectral.hpp"
#include "invpress/system.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace invpress {

struct PressureResult {
    double log_unstable_det = 0.0;
    double min_potential = 0.0;
    double pressure = 0.0;  // log_unstable_det + min_potential
    double entropy = 0.0;   // log_unstable_det
    Vector argmin_control;
    bool empty_grid = false;
};

/// log|det A+| + min_U f for hyperbolic controllable systems.
PressureResult invariance_pressure_formula(const LinearSystem& sys, const SpectralSplit& split, const Potential& p,
                                           int grid = kDefaultMinimizeGrid, int refine_iters = kDefaultRefineRounds);

/// log|det A+| for hyperbolic controllable systems.
double invariance_entropy_formula(const LinearSystem& sys, const SpectralSplit& split);

/// The unique tau-periodic trajectory x = (I - A^tau)^{-1} phi(tau, 0, u) of a
/// tau-periodic control; states hold x_0 .. x_tau with x_tau = x_0.
Trajectory periodic_orbit(const LinearSystem& sys, const ControlSequence& u_periodic);

struct PeriodicBound {
    bool found = false;
    double bound = 0.0;    // log|det A+| + best average, +inf when nothing admissible
    double average = 0.0;  // (1/tau) sum f along the best orbit
    int tau = 0;
    ControlSequence controls;
    Vector start;
    int candidates = 0;
    int admissible = 0;
};

/// Scans periodic controls of period d..tau_max whose orbit stays in int D and
/// whose values lie in int U, and returns the best averaged potential.
PeriodicBound upper_bound_via_periodic(const LinearSystem& sys, const SpectralSplit& split, const ConvexPolytope& d,
                                       const Potential& p, int tau_max, int samples = 64, std::uint64_t seed = 0);

struct SpanningConstructionConfig {
    int tau0 = 0;
    int m = 1;
    double xi = 0.1;
    double delta = 0.05;
    std::optional<double> b0;        // searched when absent
    std::optional<Vector> x0;        // derived from u0 when absent
    ControlSequence u0;              // tau0 values; zero controls when empty
    int validation_samples = 200;
    std::uint64_t seed = 0;
};

struct SpanningSet {
    int tau = 0;
    std::vector<ControlSequence> controls;
    std::vector<double> log_weights;  // (S_tau f) per control
    std::vector<long long> counts;    // M_j(tau) per Lyapunov group
    double b0 = 0.0;
    Vector x0;
    Matrix cube_basis;                // columns: Lyapunov coordinates of the cube
    double control_margin = 0.0;      // min interior margin of u0 + u in U
    bool returns_to_cube = false;     // every subcuboid corner lands back in the cube
    int sample_violations = 0;        // random cube points that left D or missed the cube
    int samples_checked = 0;

    std::size_t cardinality() const { return controls.size(); }
    std::vector<double> weights() const;
};

/// M_j(tau) = floor((rho_j + xi)^tau) + 1 for rho_j >= 1, else 1.
long long lyapunov_count(double rho, double xi, int tau);

SpanningSet spanning_construction(const LinearSystem& sys, const SpectralSplit& split, const ConvexPolytope& d,
                                  const SpanningConstructionConfig& cfg, const Potential& p);

/// (1/tau) log sum of weights.
double spanning_rate(const SpanningSet& ss);

/// (1/tau) log sum exp(s_i), computed stably.
double log_sum_exp_rate(const std::vector<double>& exponents, int tau);

}  // namespace invpress
