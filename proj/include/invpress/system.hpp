#pragma once

#include "invpress/polytope.hpp"
#include "invpress/types.hpp"

namespace invpress {

/// x_{k+1} = A x_k + B u_k with u_k in U.
class LinearSystem {
public:
    /// Validates shapes, |det A| > 1e-12 and 0 in the interior of U (margin >= 1e-9).
    LinearSystem(Matrix a, Matrix b, ConvexPolytope u);

    const Matrix& A() const { return a_; }
    const Matrix& B() const { return b_; }
    const ConvexPolytope& U() const { return u_; }
    int d() const { return static_cast<int>(a_.rows()); }
    int m() const { return static_cast<int>(b_.cols()); }

    /// Same system with every control value scaled by `factor`.
    LinearSystem with_scaled_controls(double factor) const;

private:
    Matrix a_;
    Matrix b_;
    ConvexPolytope u_;
};

struct Trajectory {
    Vector start;
    ControlSequence controls;
    std::vector<Vector> states;  // x_0 .. x_tau
};

constexpr double kControlTolerance = 1e-9;

bool control_in_range(const LinearSystem& sys, const Vector& u, double tol = kControlTolerance);

/// A x + B u; ControlOutOfRange when u is outside U by more than 1e-9.
Vector step(const LinearSystem& sys, const Vector& x, const Vector& u);

Trajectory trajectory(const LinearSystem& sys, const Vector& x, const ControlSequence& controls);

/// phi(k, x, u) = A^k x + sum A^{k-1-i} B u_i, without range checks.
Vector solution_formula(const LinearSystem& sys, const Vector& x, const ControlSequence& controls);

/// (A^{-1}, -A^{-1} B) with the same U.
LinearSystem time_reversed(const LinearSystem& sys);

}  // namespace invpress
