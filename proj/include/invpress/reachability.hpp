#pragma once

#include "invpress/polytope.hpp"
#include "invpress/spectral.hpp"
#include "invpress/system.hpp"

#include <vector>

namespace invpress {

/// R_1(0), R_2(0), ... computed as R_{k+1} = B U + A R_k and kept for reuse.
class ReachSequence {
public:
    explicit ReachSequence(LinearSystem sys);

    /// R_k(0) for k >= 1 (d <= 3).
    const ConvexPolytope& at(int k);
    const LinearSystem& system() const { return sys_; }

private:
    LinearSystem sys_;
    ConvexPolytope bu_;
    std::vector<ConvexPolytope> sets_;
};

/// R_k(0); DimensionUnsupported for d > 3.
ConvexPolytope reach_k(const LinearSystem& sys, int k);

/// C_k(0), the time-k reachable set of the time-reversed system.
ConvexPolytope control_k(const LinearSystem& sys, int k);

/// Whether some u in U^k gives phi(k, 0, u) = x, up to a max-norm residual of tol.
bool reach_membership(const LinearSystem& sys, const Vector& x, int k, double tol = 1e-9);

struct StructureReport {
    int k_max = 0;
    // Per horizon k = 1..k_max.
    std::vector<double> reach_stable_norm;          // max |P_s v| over vertices of R_k(0)
    std::vector<double> reach_center_unstable_inradius;  // inradius of R_k(0) in E^c + E^u coordinates
    std::vector<double> control_unstable_norm;      // max |P_u v| over vertices of C_k(0)
    std::vector<double> control_stable_center_inradius;  // inradius of C_k(0) in E^s + E^c coordinates

    double reach_stable_sup() const;
    double control_unstable_sup() const;
};

/// Growth of the bounded and unbounded factors of R_k(0) and C_k(0), k <= k_max.
StructureReport structure_check(const LinearSystem& sys, const SpectralSplit& split, int k_max);

}  // namespace invpress
