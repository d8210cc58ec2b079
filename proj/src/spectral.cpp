#include "invpress/spectral.hpp"

#include "invpress/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace invpress {

namespace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Complex Schur form A = Q T Q^H that can be reordered in place.
struct Schur {
    ComplexMatrix t;
    ComplexMatrix q;

    Eigen::Index size() const { return t.rows(); }
    Complex diag(Eigen::Index i) const { return t(i, i); }

    // Exchanges the diagonal entries k and k+1 with a unitary rotation.
    void swap(Eigen::Index k) {
        const Complex t11 = t(k, k), t12 = t(k, k + 1), t22 = t(k + 1, k + 1);
        Eigen::Vector2cd v(t12, t22 - t11);
        const double norm = v.norm();
        if (norm == 0.0) return;
        v /= norm;
        Eigen::Matrix2cd g;
        g.col(0) = v;
        g.col(1) = Eigen::Vector2cd(-std::conj(v(1)), std::conj(v(0)));
        t.middleCols(k, 2) = t.middleCols(k, 2) * g;
        t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
        q.middleCols(k, 2) = q.middleCols(k, 2) * g;
        t(k + 1, k) = 0.0;
        t(k, k) = t22;
        t(k + 1, k + 1) = t11;
    }

    // Moves every diagonal entry whose current index satisfies `selected` to
    // the top, preserving relative order. Returns the number selected.
    template <class Pred>
    Eigen::Index reorder(Pred selected) {
        std::vector<bool> flag(static_cast<std::size_t>(size()));
        for (Eigen::Index i = 0; i < size(); ++i) flag[static_cast<std::size_t>(i)] = selected(i);
        Eigen::Index placed = 0;
        for (Eigen::Index i = 0; i < size(); ++i) {
            if (!flag[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index k = i - 1; k >= placed; --k) {
                swap(k);
                std::swap(flag[static_cast<std::size_t>(k)], flag[static_cast<std::size_t>(k + 1)]);
            }
            ++placed;
        }
        return placed;
    }
};

// Orthonormal real basis of the (conjugation-closed) span of q's first k columns.
Matrix real_basis(const ComplexMatrix& q, Eigen::Index k) {
    const Eigen::Index d = q.rows();
    if (k == 0) return Matrix(d, 0);
    Matrix stacked(d, 2 * k);
    stacked << q.leftCols(k).real(), q.leftCols(k).imag();
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(k);
}

// Basis of the invariant subspace for eigenvalues picked by `keep`.
template <class Keep>
Matrix invariant_subspace(const Schur& base, Keep keep) {
    Schur s = base;
    std::vector<bool> flag(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.size(); ++i) flag[static_cast<std::size_t>(i)] = keep(s.diag(i));
    const Eigen::Index k = s.reorder([&](Eigen::Index i) { return flag[static_cast<std::size_t>(i)]; });
    return real_basis(s.q, k);
}

std::vector<Eigenvalue> collect_eigenvalues(const std::vector<Complex>& values) {
    std::vector<Eigenvalue> out;
    for (const Complex& raw : values) {
        const double scale = std::max(1.0, std::abs(raw));
        if (raw.imag() < -1e-10 * scale) continue;  // represented by its conjugate
        const bool pair = std::abs(raw.imag()) > 1e-10 * scale;
        const Complex v = pair ? raw : Complex(raw.real(), 0.0);
        auto same = std::find_if(out.begin(), out.end(), [&](const Eigenvalue& e) {
            return e.pair == pair && std::abs(e.value - v) <= 1e-6 * scale;
        });
        if (same != out.end()) {
            ++same->multiplicity;
        } else {
            out.push_back({v, 1, pair});
        }
    }
    std::sort(out.begin(), out.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
        if (a.modulus() != b.modulus()) return a.modulus() < b.modulus();
        return std::arg(a.value) < std::arg(b.value);
    });
    return out;
}

}  // namespace

SpectralSplit spectral_split(const Matrix& a, double tol_center) {
    if (a.rows() != a.cols() || a.rows() == 0) throw DimensionMismatch("A must be a nonempty square matrix");
    if (!(tol_center > 0.0 && tol_center < 0.5)) throw PreconditionViolated("tol_center must lie in (0, 0.5)");
    if (std::abs(a.determinant()) <= 1e-12) throw SingularMatrix("|det A| <= 1e-12");

    const Eigen::Index d = a.rows();
    Eigen::ComplexSchur<ComplexMatrix> cs(a.cast<Complex>());
    const Schur schur{cs.matrixT(), cs.matrixU()};

    std::vector<Complex> values(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) values[static_cast<std::size_t>(i)] = schur.diag(i);
    for (const Complex& v : values) {
        const double gap = std::abs(std::abs(v) - 1.0);
        if (std::abs(gap - tol_center) < tol_center / 10.0) {
            throw IllConditionedSplit("eigenvalue modulus " + std::to_string(std::abs(v)) +
                                      " lies at the edge of the center band");
        }
    }

    SpectralSplit split;
    split.tol_center = tol_center;
    split.eigenvalues = collect_eigenvalues(values);

    const auto is_stable = [&](Complex v) { return std::abs(v) < 1.0 - tol_center; };
    const auto is_unstable = [&](Complex v) { return std::abs(v) > 1.0 + tol_center; };
    const auto is_center = [&](Complex v) { return !is_stable(v) && !is_unstable(v); };
    split.basis_s = invariant_subspace(schur, is_stable);
    split.basis_c = invariant_subspace(schur, is_center);
    split.basis_u = invariant_subspace(schur, is_unstable);

    for (const Complex& v : values) {
        if (is_unstable(v)) split.log_unstable_det += std::log(std::abs(v));
    }

    // pi = T diag(0, I) T^{-1} with T = [E^s E^c | E^u].
    Matrix t(d, d);
    t << split.basis_s, split.basis_c, split.basis_u;
    Matrix mask = Matrix::Zero(d, d);
    for (int i = split.d_s() + split.d_c(); i < d; ++i) mask(i, i) = 1.0;
    split.projection_u = t * mask * t.partialPivLu().inverse();

    // Lyapunov groups: moduli chained together within relative 1e-8.
    std::vector<double> moduli;
    for (const Complex& v : values) moduli.push_back(std::abs(v));
    std::sort(moduli.begin(), moduli.end());
    std::vector<std::pair<double, double>> ranges;  // [lo, hi] per group
    for (double r : moduli) {
        if (!ranges.empty() && r - ranges.back().second <= 1e-8 * std::max(1.0, r)) {
            ranges.back().second = r;
        } else {
            ranges.emplace_back(r, r);
        }
    }
    for (const auto& [lo, hi] : ranges) {
        const auto in_group = [&](Complex v) {
            const double r = std::abs(v);
            return r >= lo && r <= hi;
        };
        LyapunovGroup g;
        g.basis = invariant_subspace(schur, in_group);
        g.dim = static_cast<int>(g.basis.cols());
        double sum = 0.0;
        for (const Complex& v : values) {
            if (in_group(v)) sum += std::abs(v);
        }
        g.rho = sum / g.dim;
        split.lyapunov_groups.push_back(std::move(g));
    }
    return split;
}

double unstable_log_det(const SpectralSplit& split) { return split.log_unstable_det; }

bool is_hyperbolic(const SpectralSplit& split) { return split.d_c() == 0; }

KalmanResult kalman_controllable(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != a.rows()) throw DimensionMismatch("A must be d x d and B d x m");
    const Eigen::Index d = a.rows(), m = b.cols();
    Matrix k(d, d * m);
    Matrix block = b;
    for (Eigen::Index i = 0; i < d; ++i) {
        k.middleCols(i * m, m) = block;
        block = a * block;
    }
    const Vector sv = Eigen::JacobiSVD<Matrix>(k).singularValues();
    KalmanResult out;
    if (sv.size() > 0 && sv(0) > 0.0) {
        const double cutoff = 1e-9 * sv(0);
        for (Eigen::Index i = 0; i < sv.size(); ++i) out.rank += sv(i) > cutoff ? 1 : 0;
    }
    out.controllable = out.rank == d;
    return out;
}

GlobalControllability classify_global_controllability(const Matrix& a, const Matrix& b, const SpectralSplit& split) {
    if (!kalman_controllable(a, b).controllable) return GlobalControllability::Neither;
    const bool reach_all = split.d_s() == 0;
    const bool to_zero_all = split.d_u() == 0;
    if (reach_all && to_zero_all) return GlobalControllability::ControllableEverywhere;
    if (reach_all) return GlobalControllability::ReachableAll;
    if (to_zero_all) return GlobalControllability::ControllableToZeroAll;
    return GlobalControllability::Neither;
}

std::string to_string(GlobalControllability c) {
    switch (c) {
    case GlobalControllability::ReachableAll: return "ReachableAll";
    case GlobalControllability::ControllableToZeroAll: return "ControllableToZeroAll";
    case GlobalControllability::ControllableEverywhere: return "ControllableEverywhere";
    case GlobalControllability::Neither: return "Neither";
    }
    return "Neither";
}

}  // namespace invpress
