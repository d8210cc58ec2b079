#pragma once

#include "invpress/types.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace invpress {

/// {x : normals.row(i)·x <= offsets(i)} with unit-length rows.
struct Halfspaces {
    Matrix normals;
    Vector offsets;

    Eigen::Index size() const { return offsets.size(); }
    /// Largest violation max_i(n_i·x - c_i); nonpositive inside.
    double max_violation(const Vector& x) const;
};

struct NearestPoint {
    Vector point;
    double distance = 0.0;
};

/// Bounded convex set in vertex representation.
///
/// Polytopes built through `from_points` in dimension <= 3 are normalized: the
/// vertex list is minimal, near-duplicate vertices (1e-10) are merged, and a
/// halfspace representation is attached. In the plane, vertices of a
/// full-dimensional polygon are stored counterclockwise. Above dimension 3 the
/// vertex list is pruned by linear programming and no halfspaces are derived,
/// except for boxes, which carry their bounds.
class ConvexPolytope {
public:
    static constexpr double kMergeTolerance = 1e-10;

    /// Hull of the columns of `points` (dim x n).
    static ConvexPolytope from_points(const Matrix& points);
    static ConvexPolytope from_points(const std::vector<Vector>& points);
    static ConvexPolytope box(const Vector& lower, const Vector& upper);
    static ConvexPolytope singleton(const Vector& point) { return from_points(Matrix(point)); }
    /// Bounded intersection of halfspaces (dim <= 3).
    static ConvexPolytope from_halfspaces(const Halfspaces& h);

    int dim() const { return static_cast<int>(vertices_.rows()); }
    Eigen::Index num_vertices() const { return vertices_.cols(); }
    /// One vertex per column.
    const Matrix& vertices() const { return vertices_; }
    Vector vertex(Eigen::Index i) const { return vertices_.col(i); }
    const std::optional<Halfspaces>& halfspaces() const { return halfspaces_; }
    /// Halfspaces or DimensionUnsupported.
    const Halfspaces& require_halfspaces() const;
    /// Dimension of the affine hull (only tracked in dim <= 3, else dim()).
    int affine_dim() const { return structure_ ? structure_->affine_dim : dim(); }

    Vector lower_bounds() const { return vertices_.rowwise().minCoeff(); }
    Vector upper_bounds() const { return vertices_.rowwise().maxCoeff(); }
    Vector centroid() const { return vertices_.rowwise().mean(); }

    /// Euclidean nearest point of the polytope to x (dim <= 3).
    NearestPoint nearest(const Vector& x) const;

private:
    // Affine frame and facet incidences produced by the hull.
    struct Structure {
        int affine_dim = 0;
        Vector origin;
        Matrix basis;                                // dim x affine_dim, orthonormal
        std::vector<std::vector<Eigen::Index>> faces;  // cyclic vertex lists (affine_dim 3) or edges (2)
    };

    ConvexPolytope() = default;
    static ConvexPolytope from_points_limited(const Matrix& points, Eigen::Index max_rank);

    Matrix vertices_;
    std::optional<Halfspaces> halfspaces_;
    std::shared_ptr<const Structure> structure_;
};

/// Hull of points with dim <= 3; DimensionUnsupported above.
ConvexPolytope convex_hull(const Matrix& points);

/// Hull of {M v : v vertex of P}.
ConvexPolytope linear_image(const ConvexPolytope& p, const Matrix& m);

ConvexPolytope translate(const ConvexPolytope& p, const Vector& offset);

/// Hull of all pairwise vertex sums (dim <= 3).
ConvexPolytope minkowski_sum(const ConvexPolytope& p, const ConvexPolytope& q);

/// True iff x lies within Euclidean distance tol of P. Above dimension 3 the
/// band is measured in the max-norm through an LP over convex coefficients.
bool contains_point(const ConvexPolytope& p, const Vector& x, double tol);

/// Euclidean distance from x to P (dim <= 3).
double distance_to(const ConvexPolytope& p, const Vector& x);

double hausdorff_distance(const ConvexPolytope& p, const ConvexPolytope& q);

/// Intersection of two polytopes of equal dimension <= 3. Throws
/// DegenerateIntersection when the intersection has empty interior.
ConvexPolytope intersect(const ConvexPolytope& p, const ConvexPolytope& q);

struct ChebyshevBall {
    Vector center;
    double radius = 0.0;
};

/// Largest inscribed ball (requires halfspaces).
ChebyshevBall chebyshev_ball(const ConvexPolytope& p);
ChebyshevBall chebyshev_ball(const Halfspaces& h);

inline double inradius(const ConvexPolytope& p) { return chebyshev_ball(p).radius; }

/// Signed distance from x to the boundary: positive inside, min_i(c_i - n_i·x).
double interior_margin(const ConvexPolytope& p, const Vector& x);

/// Polytope with every halfspace moved inward by `margin`.
ConvexPolytope shrink(const ConvexPolytope& p, double margin);

/// Max over vertices of |v|_2.
double max_vertex_norm(const ConvexPolytope& p);

}  // namespace invpress
