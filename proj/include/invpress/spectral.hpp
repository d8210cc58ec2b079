#pragma once

#include "invpress/types.hpp"

#include <complex>
#include <string>
#include <vector>

namespace invpress {

/// One eigenvalue with its algebraic multiplicity. A conjugate pair is stored
/// once (with positive imaginary part) and `pair` set; the multiplicity then
/// counts one member of the pair.
struct Eigenvalue {
    std::complex<double> value;
    int multiplicity = 1;
    bool pair = false;

    double modulus() const { return std::abs(value); }
    int count() const { return pair ? 2 * multiplicity : multiplicity; }
};

/// A Lyapunov space: all generalized eigenvectors whose eigenvalue has modulus rho.
struct LyapunovGroup {
    double rho = 0.0;
    int dim = 0;
    Matrix basis;  // d x dim, orthonormal, A-invariant
};

struct SpectralSplit {
    std::vector<Eigenvalue> eigenvalues;
    Matrix basis_s, basis_c, basis_u;  // orthonormal, A-invariant
    Matrix projection_u;               // onto E^u along E^s + E^c
    std::vector<LyapunovGroup> lyapunov_groups;  // increasing rho
    double log_unstable_det = 0.0;
    double tol_center = 1e-8;

    int dim() const { return static_cast<int>(projection_u.rows()); }
    int d_s() const { return static_cast<int>(basis_s.cols()); }
    int d_c() const { return static_cast<int>(basis_c.cols()); }
    int d_u() const { return static_cast<int>(basis_u.cols()); }
};

constexpr double kDefaultCenterTolerance = 1e-8;

SpectralSplit spectral_split(const Matrix& a, double tol_center = kDefaultCenterTolerance);

double unstable_log_det(const SpectralSplit& split);

bool is_hyperbolic(const SpectralSplit& split);

struct KalmanResult {
    int rank = 0;
    bool controllable = false;
};

/// Numerical rank of [B AB ... A^{d-1}B] with singular-value cutoff 1e-9 * largest.
KalmanResult kalman_controllable(const Matrix& a, const Matrix& b);

enum class GlobalControllability { ReachableAll, ControllableToZeroAll, ControllableEverywhere, Neither };

GlobalControllability classify_global_controllability(const Matrix& a, const Matrix& b, const SpectralSplit& split);

std::string to_string(GlobalControllability c);

}  // namespace invpress
