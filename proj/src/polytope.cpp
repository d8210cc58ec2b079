#include "invpress/polytope.hpp"

#include "invpress/errors.hpp"
#include "invpress/lp.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace invpress {

namespace {

using Index = Eigen::Index;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

constexpr double kFlatTolerance = 1e-10;   // relative to coordinate scale
constexpr double kSineTolerance = 1e-12;   // 2D collinearity, scale-free
constexpr double kVisibleTolerance = 1e-11;  // 3D visibility, relative to scale
constexpr double kNormalMerge = 1e-9;

double coordinate_scale(const Matrix& points) {
    return points.size() == 0 ? 1.0 : std::max(1.0, points.cwiseAbs().maxCoeff());
}

// Representatives of clusters of points closer than tol (sup-norm), stable order.
std::vector<Index> merge_duplicates(const Matrix& points, double tol) {
    const Index n = points.cols();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (points(0, a) != points(0, b)) return points(0, a) < points(0, b);
        return a < b;
    });
    std::vector<bool> removed(static_cast<std::size_t>(n), false);
    std::vector<Index> keep;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Index a = order[i];
        if (removed[static_cast<std::size_t>(a)]) continue;
        keep.push_back(a);
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const Index b = order[j];
            if (points(0, b) - points(0, a) > tol) break;
            if (!removed[static_cast<std::size_t>(b)] && (points.col(b) - points.col(a)).cwiseAbs().maxCoeff() <= tol) {
                removed[static_cast<std::size_t>(b)] = true;
            }
        }
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

struct Frame {
    int rank = 0;
    Vector origin;
    Matrix basis;       // dim x rank
    Matrix complement;  // dim x (dim - rank)
};

// Greedy farthest-point affine frame of the columns of `points`.
Frame affine_frame(const Matrix& points, Index max_rank) {
    const Index dim = points.rows();
    const double tol = kFlatTolerance * coordinate_scale(points);
    Frame f;
    f.origin = points.col(0);
    Matrix basis(dim, 0);
    for (Index k = 0; k < std::min(dim, max_rank); ++k) {
        double best = tol;
        Index best_idx = -1;
        for (Index j = 0; j < points.cols(); ++j) {
            Vector r = points.col(j) - f.origin;
            if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
            const double nrm = r.norm();
            if (nrm > best) {
                best = nrm;
                best_idx = j;
            }
        }
        if (best_idx < 0) break;
        Vector r = points.col(best_idx) - f.origin;
        // Two Gram-Schmidt passes keep the basis orthonormal to working precision.
        for (int pass = 0; pass < 2; ++pass) {
            if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
        }
        basis.conservativeResize(dim, basis.cols() + 1);
        basis.col(basis.cols() - 1) = r.normalized();
    }
    f.rank = static_cast<int>(basis.cols());
    if (dim == 2 && f.rank == 2) {
        // Keep local orientation equal to the ambient one so that CCW is preserved.
        if (basis(0, 0) * basis(1, 1) - basis(0, 1) * basis(1, 0) < 0.0) basis.col(1) *= -1.0;
    }
    if (dim == 3 && f.rank == 3) {
        if (basis.determinant() < 0.0) basis.col(2) *= -1.0;
    }
    f.basis = basis;
    if (f.rank < dim) {
        Eigen::HouseholderQR<Matrix> qr(f.rank > 0 ? Matrix(basis) : Matrix(Matrix::Identity(dim, 1)));
        Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
        f.complement = q.rightCols(dim - f.rank);
    } else {
        f.complement = Matrix(dim, 0);
    }
    return f;
}

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

bool turns_left(const Vec2& o, const Vec2& a, const Vec2& b) {
    const double c = cross2(o, a, b);
    return c > kSineTolerance * (a - o).norm() * (b - o).norm();
}

// Andrew's monotone chain; returns indices in counterclockwise order.
std::vector<Index> hull_2d(const std::vector<Vec2>& pts) {
    std::vector<Index> order(pts.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const auto& p = pts[static_cast<std::size_t>(a)];
        const auto& q = pts[static_cast<std::size_t>(b)];
        return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
    });
    if (order.size() < 3) return order;
    std::vector<Index> hull(2 * order.size());
    std::size_t k = 0;
    auto at = [&](Index i) -> const Vec2& { return pts[static_cast<std::size_t>(i)]; };
    for (Index i : order) {
        while (k >= 2 && !turns_left(at(hull[k - 2]), at(hull[k - 1]), at(i))) --k;
        hull[k++] = i;
    }
    const std::size_t lower = k + 1;
    for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
        while (k >= lower && !turns_left(at(hull[k - 2]), at(hull[k - 1]), at(*it))) --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    return hull;
}

struct Triangle {
    Index a, b, c;
    Vec3 normal;
    double offset;
    bool alive = true;
};

Triangle make_triangle(const std::vector<Vec3>& p, Index a, Index b, Index c) {
    const auto P = [&](Index i) -> const Vec3& { return p[static_cast<std::size_t>(i)]; };
    Vec3 n = (P(b) - P(a)).cross(P(c) - P(a));
    n.normalize();
    return {a, b, c, n, n.dot(P(a)), true};
}

std::uint64_t edge_key(Index a, Index b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

// Incremental hull of full-dimensional 3D points; `seed` holds four affinely
// independent indices. Returns surviving triangles with outward normals.
std::vector<Triangle> hull_3d(const std::vector<Vec3>& p, const std::array<Index, 4>& seed, double eps) {
    std::vector<Triangle> faces;
    const Vec3 inner = (p[seed[0]] + p[seed[1]] + p[seed[2]] + p[seed[3]]) / 4.0;
    const std::array<std::array<int, 3>, 4> tet{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
    for (const auto& t : tet) {
        Triangle tri = make_triangle(p, seed[t[0]], seed[t[1]], seed[t[2]]);
        if (tri.normal.dot(inner) > tri.offset) tri = make_triangle(p, seed[t[0]], seed[t[2]], seed[t[1]]);
        faces.push_back(tri);
    }
    std::unordered_map<std::uint64_t, Index> edge_face;
    auto register_face = [&](Index f) {
        const auto& t = faces[static_cast<std::size_t>(f)];
        edge_face[edge_key(t.a, t.b)] = f;
        edge_face[edge_key(t.b, t.c)] = f;
        edge_face[edge_key(t.c, t.a)] = f;
    };
    for (Index f = 0; f < 4; ++f) register_face(f);

    std::vector<Index> order;
    for (Index i = 0; i < static_cast<Index>(p.size()); ++i) {
        if (std::find(seed.begin(), seed.end(), i) == seed.end()) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double da = (p[static_cast<std::size_t>(a)] - inner).squaredNorm();
        const double db = (p[static_cast<std::size_t>(b)] - inner).squaredNorm();
        return da > db || (da == db && a < b);
    });

    std::vector<bool> visible;
    for (Index idx : order) {
        const Vec3& x = p[static_cast<std::size_t>(idx)];
        visible.assign(faces.size(), false);
        bool any = false;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (faces[f].alive && faces[f].normal.dot(x) - faces[f].offset > eps) {
                visible[f] = true;
                any = true;
            }
        }
        if (!any) continue;
        std::vector<std::pair<Index, Index>> horizon;
        for (std::size_t f = 0; f < visible.size(); ++f) {
            if (!visible[f]) continue;
            const auto& t = faces[f];
            const std::array<std::pair<Index, Index>, 3> edges{{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
            for (const auto& [u, v] : edges) {
                auto it = edge_face.find(edge_key(v, u));
                if (it == edge_face.end() || !visible[static_cast<std::size_t>(it->second)]) horizon.emplace_back(u, v);
            }
        }
        for (std::size_t f = 0; f < visible.size(); ++f) {
            if (!visible[f]) continue;
            auto& t = faces[f];
            t.alive = false;
            for (const auto& [u, v] : std::array<std::pair<Index, Index>, 3>{{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}}) {
                auto it = edge_face.find(edge_key(u, v));
                if (it != edge_face.end() && it->second == static_cast<Index>(f)) edge_face.erase(it);
            }
        }
        for (const auto& [u, v] : horizon) {
            faces.push_back(make_triangle(p, u, v, idx));
            register_face(static_cast<Index>(faces.size() - 1));
        }
    }
    std::vector<Triangle> alive;
    for (const auto& f : faces) {
        if (f.alive) alive.push_back(f);
    }
    return alive;
}

int numerical_rank(const Matrix& m, double rel) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (Index i = 0; i < s.size(); ++i) r += s(i) > rel * s(0) ? 1 : 0;
    return r;
}

// Orders planar points counterclockwise around `normal`.
std::vector<Index> order_around(const Matrix& vertices, std::vector<Index> ids, const Vec3& normal) {
    Vec3 c = Vec3::Zero();
    for (Index i : ids) c += vertices.col(i).head<3>();
    c /= static_cast<double>(ids.size());
    Vec3 u = normal.unitOrthogonal();
    Vec3 v = normal.cross(u);
    std::sort(ids.begin(), ids.end(), [&](Index a, Index b) {
        const Vec3 da = vertices.col(a).head<3>() - c;
        const Vec3 db = vertices.col(b).head<3>() - c;
        return std::atan2(da.dot(v), da.dot(u)) < std::atan2(db.dot(v), db.dot(u));
    });
    return ids;
}

Vector clamp_segment(const Vector& x, const Vector& a, const Vector& b) {
    const Vector ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return a;
    const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

}  // namespace

double Halfspaces::max_violation(const Vector& x) const {
    if (size() == 0) return -std::numeric_limits<double>::infinity();
    return (normals * x - offsets).maxCoeff();
}

const Halfspaces& ConvexPolytope::require_halfspaces() const {
    if (!halfspaces_) {
        throw DimensionUnsupported("halfspace representation unavailable in dimension " + std::to_string(dim()));
    }
    return *halfspaces_;
}

ConvexPolytope ConvexPolytope::from_points(const std::vector<Vector>& points) {
    if (points.empty()) throw PreconditionViolated("polytope needs at least one point");
    Matrix m(points.front().size(), static_cast<Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != m.rows()) throw DimensionMismatch("points of mixed dimension");
        m.col(static_cast<Index>(i)) = points[i];
    }
    return from_points(m);
}

ConvexPolytope ConvexPolytope::from_points(const Matrix& points) { return from_points_limited(points, 3); }

ConvexPolytope ConvexPolytope::from_points_limited(const Matrix& points, Eigen::Index max_rank) {
    if (points.cols() == 0 || points.rows() == 0) throw PreconditionViolated("polytope needs at least one point");
    if (!points.allFinite()) throw PreconditionViolated("polytope points must be finite");
    const Index dim = points.rows();
    const std::vector<Index> unique = merge_duplicates(points, kMergeTolerance);
    Matrix pts(dim, static_cast<Index>(unique.size()));
    for (std::size_t i = 0; i < unique.size(); ++i) pts.col(static_cast<Index>(i)) = points.col(unique[i]);

    ConvexPolytope out;
    if (dim > 3) {
        // Prune points lying in the hull of the remaining ones.
        std::vector<bool> keep(static_cast<std::size_t>(pts.cols()), true);
        if (pts.cols() > 1 && pts.cols() <= 512) {
            for (Index i = 0; i < pts.cols(); ++i) {
                std::vector<Index> others;
                for (Index j = 0; j < pts.cols(); ++j) {
                    if (j != i && keep[static_cast<std::size_t>(j)]) others.push_back(j);
                }
                LpProblem lp;
                const auto n = static_cast<Index>(others.size());
                lp.objective = Vector::Zero(n);
                lp.lower.assign(static_cast<std::size_t>(n), 0.0);
                lp.upper.assign(static_cast<std::size_t>(n), std::nullopt);
                lp.add(Vector::Ones(n), Relation::Equal, 1.0);
                for (Index r = 0; r < dim; ++r) {
                    Vector row(n);
                    for (Index k = 0; k < n; ++k) row(k) = pts(r, others[static_cast<std::size_t>(k)]);
                    lp.add(row, Relation::Equal, pts(r, i));
                }
                if (lp_solve(lp).optimal()) keep[static_cast<std::size_t>(i)] = false;
            }
        }
        std::vector<Index> ids;
        for (Index i = 0; i < pts.cols(); ++i) {
            if (keep[static_cast<std::size_t>(i)]) ids.push_back(i);
        }
        out.vertices_.resize(dim, static_cast<Index>(ids.size()));
        for (std::size_t i = 0; i < ids.size(); ++i) out.vertices_.col(static_cast<Index>(i)) = pts.col(ids[i]);
        return out;
    }

    const Frame frame = affine_frame(pts, max_rank);
    auto structure = std::make_shared<Structure>();
    structure->affine_dim = frame.rank;
    structure->origin = frame.origin;
    structure->basis = frame.basis;
    const Matrix local = frame.basis.transpose() * (pts.colwise() - frame.origin);

    std::vector<Index> vertex_ids;
    std::vector<Vector> local_normals;  // outward normals in the affine hull
    std::vector<std::vector<Index>> faces_local;  // indices into vertex_ids order

    switch (frame.rank) {
    case 0:
        vertex_ids = {0};
        break;
    case 1: {
        Index lo = 0, hi = 0;
        for (Index i = 1; i < local.cols(); ++i) {
            if (local(0, i) < local(0, lo)) lo = i;
            if (local(0, i) > local(0, hi)) hi = i;
        }
        vertex_ids = {lo, hi};
        local_normals = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
        faces_local = {{0}, {1}};
        break;
    }
    case 2: {
        std::vector<Vec2> p2(static_cast<std::size_t>(local.cols()));
        for (Index i = 0; i < local.cols(); ++i) p2[static_cast<std::size_t>(i)] = local.col(i);
        vertex_ids = hull_2d(p2);
        if (vertex_ids.size() < 3) return from_points_limited(points, 1);
        const auto n = vertex_ids.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = p2[static_cast<std::size_t>(vertex_ids[i])];
            const Vec2 b = p2[static_cast<std::size_t>(vertex_ids[(i + 1) % n])];
            const Vec2 e = b - a;
            local_normals.push_back(Vec2(e.y(), -e.x()).normalized());
            faces_local.push_back({static_cast<Index>(i), static_cast<Index>((i + 1) % n)});
        }
        break;
    }
    case 3: {
        std::vector<Vec3> p3(static_cast<std::size_t>(local.cols()));
        for (Index i = 0; i < local.cols(); ++i) p3[static_cast<std::size_t>(i)] = local.col(i);
        // Seed tetrahedron: greedy farthest points in local coordinates.
        std::array<Index, 4> seed{};
        seed[0] = 0;
        auto farthest = [&](auto&& measure) {
            Index best = 0;
            double bv = -1.0;
            for (Index i = 0; i < local.cols(); ++i) {
                const double v = measure(p3[static_cast<std::size_t>(i)]);
                if (v > bv) {
                    bv = v;
                    best = i;
                }
            }
            return best;
        };
        const Vec3 o = p3[0];
        seed[1] = farthest([&](const Vec3& x) { return (x - o).norm(); });
        const Vec3 d1 = (p3[seed[1]] - o).normalized();
        seed[2] = farthest([&](const Vec3& x) { return ((x - o) - d1 * d1.dot(x - o)).norm(); });
        const Vec3 nrm = d1.cross(p3[seed[2]] - o).normalized();
        seed[3] = farthest([&](const Vec3& x) { return std::abs(nrm.dot(x - o)); });
        const double eps = kVisibleTolerance * coordinate_scale(local);
        const std::vector<Triangle> tris = hull_3d(p3, seed, eps);

        // Merge coplanar triangles into facets.
        std::vector<Vec3> facet_normals;
        std::vector<std::vector<Index>> facet_points;
        for (const auto& t : tris) {
            std::size_t f = 0;
            for (; f < facet_normals.size(); ++f) {
                if ((facet_normals[f] - t.normal).norm() <= kNormalMerge) break;
            }
            if (f == facet_normals.size()) {
                facet_normals.push_back(t.normal);
                facet_points.emplace_back();
            }
            for (Index v : {t.a, t.b, t.c}) facet_points[f].push_back(v);
        }
        // A point is a vertex iff its incident facet normals span R^3.
        std::unordered_map<Index, std::vector<std::size_t>> incident;
        for (std::size_t f = 0; f < facet_points.size(); ++f) {
            auto& fp = facet_points[f];
            std::sort(fp.begin(), fp.end());
            fp.erase(std::unique(fp.begin(), fp.end()), fp.end());
            for (Index v : fp) incident[v].push_back(f);
        }
        std::vector<Index> candidates;
        for (const auto& [v, fs] : incident) {
            Matrix n(static_cast<Index>(fs.size()), 3);
            for (std::size_t k = 0; k < fs.size(); ++k) n.row(static_cast<Index>(k)) = facet_normals[fs[k]].transpose();
            if (numerical_rank(n, 1e-9) == 3) candidates.push_back(v);
        }
        std::sort(candidates.begin(), candidates.end());
        if (candidates.size() < 4) return from_points_limited(points, 2);
        vertex_ids = candidates;
        std::unordered_map<Index, Index> position;
        for (std::size_t i = 0; i < vertex_ids.size(); ++i) position[vertex_ids[i]] = static_cast<Index>(i);
        for (std::size_t f = 0; f < facet_points.size(); ++f) {
            std::vector<Index> ids;
            for (Index v : facet_points[f]) {
                auto it = position.find(v);
                if (it != position.end()) ids.push_back(it->second);
            }
            if (ids.size() < 3) continue;
            local_normals.push_back(facet_normals[f]);
            faces_local.push_back(std::move(ids));
        }
        break;
    }
    default:
        break;
    }

    out.vertices_.resize(dim, static_cast<Index>(vertex_ids.size()));
    for (std::size_t i = 0; i < vertex_ids.size(); ++i) out.vertices_.col(static_cast<Index>(i)) = pts.col(vertex_ids[i]);

    Halfspaces h;
    const Index count = static_cast<Index>(local_normals.size()) + 2 * frame.complement.cols();
    h.normals.resize(count, dim);
    h.offsets.resize(count);
    Index row = 0;
    auto push = [&](const Vector& n) {
        h.normals.row(row) = n.transpose();
        h.offsets(row) = (out.vertices_.transpose() * n).maxCoeff();
        ++row;
    };
    for (const auto& g : local_normals) push((frame.basis * g).normalized());
    for (Index j = 0; j < frame.complement.cols(); ++j) {
        push(frame.complement.col(j));
        push(-frame.complement.col(j));
    }
    out.halfspaces_ = std::move(h);

    if (frame.rank == 3) {
        for (std::size_t f = 0; f < faces_local.size(); ++f) {
            structure->faces.push_back(order_around(out.vertices_, faces_local[f], local_normals[f].head<3>()));
        }
    } else {
        structure->faces = faces_local;
    }
    out.structure_ = std::move(structure);
    return out;
}

ConvexPolytope ConvexPolytope::box(const Vector& lower, const Vector& upper) {
    if (lower.size() != upper.size() || lower.size() == 0) throw DimensionMismatch("box bounds must share a positive dimension");
    if ((lower.array() > upper.array()).any()) throw PreconditionViolated("box lower bound exceeds upper bound");
    const Index n = lower.size();
    if (n > 20) throw DimensionUnsupported("box shorthand limited to dimension 20");
    const Index corners = Index{1} << n;
    Matrix v(n, corners);
    for (Index c = 0; c < corners; ++c) {
        for (Index i = 0; i < n; ++i) v(i, c) = ((c >> i) & 1) ? upper(i) : lower(i);
    }
    if (n <= 3 || (lower.array() == upper.array()).any()) return from_points(v);
    ConvexPolytope out;
    out.vertices_ = std::move(v);
    Halfspaces h;
    h.normals.resize(2 * n, n);
    h.offsets.resize(2 * n);
    h.normals.topRows(n) = Matrix::Identity(n, n);
    h.normals.bottomRows(n) = -Matrix::Identity(n, n);
    h.offsets.head(n) = upper;
    h.offsets.tail(n) = -lower;
    out.halfspaces_ = std::move(h);
    return out;
}

ConvexPolytope ConvexPolytope::from_halfspaces(const Halfspaces& h) {
    const Index dim = h.normals.cols();
    if (dim > 3) throw DimensionUnsupported("halfspace intersection limited to dimension 3");
    // Interior point first; the dual hull then yields one vertex per dual facet.
    const ChebyshevBall ball = chebyshev_ball(h);
    const double scale = std::max(1.0, ball.center.cwiseAbs().maxCoeff());
    if (ball.radius <= 1e-12 * scale) throw DegenerateIntersection("halfspace intersection has empty interior");

    Matrix dual(dim, h.size());
    Index count = 0;
    for (Index i = 0; i < h.size(); ++i) {
        const double slack = h.offsets(i) - h.normals.row(i).dot(ball.center);
        if (slack <= 0.0) continue;
        dual.col(count++) = h.normals.row(i).transpose() / slack;
    }
    dual.conservativeResize(dim, count);
    const ConvexPolytope dual_hull = from_points(dual);
    if (dual_hull.affine_dim() < dim) throw DegenerateIntersection("halfspace intersection is unbounded");
    const Halfspaces& facets = dual_hull.require_halfspaces();
    Matrix primal(dim, facets.size());
    for (Index i = 0; i < facets.size(); ++i) {
        primal.col(i) = ball.center + facets.normals.row(i).transpose() / facets.offsets(i);
    }
    return from_points(primal);
}

NearestPoint ConvexPolytope::nearest(const Vector& x) const {
    if (x.size() != dim()) throw DimensionMismatch("point dimension differs from polytope dimension");
    if (!structure_) {
        if (halfspaces_ && halfspaces_->size() == 2 * dim()) {
            // Box: coordinatewise clamp.
            const Vector lo = lower_bounds();
            const Vector hi = upper_bounds();
            Vector p = x.cwiseMax(lo).cwiseMin(hi);
            return {p, (p - x).norm()};
        }
        throw DimensionUnsupported("Euclidean projection limited to dimension 3");
    }
    const Structure& s = *structure_;
    const Vector rel = x - s.origin;
    auto finish = [&](const Vector& p) { return NearestPoint{p, (p - x).norm()}; };

    switch (s.affine_dim) {
    case 0:
        return finish(vertices_.col(0));
    case 1:
        return finish(clamp_segment(x, vertices_.col(0), vertices_.col(1)));
    case 2: {
        const Vector y = s.basis.transpose() * rel;
        const Index n = num_vertices();
        bool inside = true;
        for (Index i = 0; i < n && inside; ++i) {
            const Vector a = s.basis.transpose() * (vertices_.col(i) - s.origin);
            const Vector b = s.basis.transpose() * (vertices_.col((i + 1) % n) - s.origin);
            inside = (b - a)(0) * (y - a)(1) - (b - a)(1) * (y - a)(0) >= 0.0;
        }
        if (inside) return dim() == 2 ? NearestPoint{x, 0.0} : finish(s.origin + s.basis * y);
        NearestPoint best{Vector(), std::numeric_limits<double>::infinity()};
        for (Index i = 0; i < n; ++i) {
            const Vector p = clamp_segment(x, vertices_.col(i), vertices_.col((i + 1) % n));
            const double d = (p - x).norm();
            if (d < best.distance) best = {p, d};
        }
        return best;
    }
    default: {
        const Halfspaces& h = *halfspaces_;
        if (h.max_violation(x) <= 0.0) return {x, 0.0};
        NearestPoint best{Vector(), std::numeric_limits<double>::infinity()};
        for (std::size_t f = 0; f < s.faces.size(); ++f) {
            const Vector n = h.normals.row(static_cast<Index>(f)).transpose();
            const double excess = n.dot(x) - h.offsets(static_cast<Index>(f));
            if (excess <= 0.0) continue;
            const auto& ids = s.faces[f];
            const Vector q = x - excess * n;
            bool inside = true;
            for (std::size_t i = 0; i < ids.size() && inside; ++i) {
                const Vec3 a = vertices_.col(ids[i]);
                const Vec3 b = vertices_.col(ids[(i + 1) % ids.size()]);
                const Vec3 qq = q;
                inside = (b - a).cross(qq - a).dot(Vec3(n)) >= 0.0;
            }
            if (inside) {
                if (excess < best.distance) best = {q, excess};
                continue;
            }
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const Vector p = clamp_segment(x, vertices_.col(ids[i]), vertices_.col(ids[(i + 1) % ids.size()]));
                const double d = (p - x).norm();
                if (d < best.distance) best = {p, d};
            }
        }
        return best;
    }
    }
}

ConvexPolytope convex_hull(const Matrix& points) {
    if (points.rows() > 3) throw DimensionUnsupported("explicit hulls are limited to dimension 3; use LP membership");
    return ConvexPolytope::from_points(points);
}

ConvexPolytope linear_image(const ConvexPolytope& p, const Matrix& m) {
    if (m.cols() != p.dim()) throw DimensionMismatch("matrix columns must equal polytope dimension");
    return ConvexPolytope::from_points(Matrix(m * p.vertices()));
}

ConvexPolytope translate(const ConvexPolytope& p, const Vector& offset) {
    if (offset.size() != p.dim()) throw DimensionMismatch("translation dimension mismatch");
    return ConvexPolytope::from_points(Matrix(p.vertices().colwise() + offset));
}

ConvexPolytope minkowski_sum(const ConvexPolytope& p, const ConvexPolytope& q) {
    if (p.dim() != q.dim()) throw DimensionMismatch("Minkowski sum of polytopes of different dimension");
    if (p.dim() > 3) throw DimensionUnsupported("explicit Minkowski sums are limited to dimension 3");
    Matrix sums(p.dim(), p.num_vertices() * q.num_vertices());
    Index k = 0;
    for (Index i = 0; i < p.num_vertices(); ++i) {
        for (Index j = 0; j < q.num_vertices(); ++j) sums.col(k++) = p.vertices().col(i) + q.vertices().col(j);
    }
    return ConvexPolytope::from_points(sums);
}

bool contains_point(const ConvexPolytope& p, const Vector& x, double tol) {
    if (x.size() != p.dim()) throw DimensionMismatch("point dimension differs from polytope dimension");
    if (const auto& h = p.halfspaces()) {
        const double v = h->max_violation(x);
        if (v <= 0.0) return true;
        if (v > tol) return false;
        if (p.dim() <= 3 || h->size() == 2 * p.dim()) return p.nearest(x).distance <= tol;
    }
    // min t subject to |V lambda - x|_inf <= t, lambda in the simplex.
    const Index n = p.num_vertices();
    const Index d = p.dim();
    LpProblem lp;
    lp.objective = Vector::Zero(n + 1);
    lp.objective(n) = -1.0;
    lp.lower.assign(static_cast<std::size_t>(n + 1), 0.0);
    lp.upper.assign(static_cast<std::size_t>(n + 1), std::nullopt);
    Vector simplex = Vector::Zero(n + 1);
    simplex.head(n).setOnes();
    lp.add(simplex, Relation::Equal, 1.0);
    for (Index r = 0; r < d; ++r) {
        Vector row(n + 1);
        row.head(n) = p.vertices().row(r).transpose();
        row(n) = -1.0;
        lp.add(row, Relation::LessEqual, x(r));
        row.head(n) = -p.vertices().row(r).transpose();
        lp.add(row, Relation::LessEqual, -x(r));
    }
    const LpResult res = lp_solve(lp);
    return res.optimal() && res.point(n) <= tol;
}

double distance_to(const ConvexPolytope& p, const Vector& x) { return p.nearest(x).distance; }

double hausdorff_distance(const ConvexPolytope& p, const ConvexPolytope& q) {
    if (p.dim() != q.dim()) throw DimensionMismatch("Hausdorff distance of polytopes of different dimension");
    double d = 0.0;
    for (Index i = 0; i < p.num_vertices(); ++i) d = std::max(d, q.nearest(p.vertex(i)).distance);
    for (Index i = 0; i < q.num_vertices(); ++i) d = std::max(d, p.nearest(q.vertex(i)).distance);
    return d;
}

ConvexPolytope intersect(const ConvexPolytope& p, const ConvexPolytope& q) {
    if (p.dim() != q.dim()) throw DimensionMismatch("intersection of polytopes of different dimension");
    if (p.dim() > 3) throw DimensionUnsupported("explicit intersections are limited to dimension 3");
    const Halfspaces& a = p.require_halfspaces();
    const Halfspaces& b = q.require_halfspaces();
    Halfspaces h;
    h.normals.resize(a.size() + b.size(), p.dim());
    h.normals << a.normals, b.normals;
    h.offsets.resize(a.size() + b.size());
    h.offsets << a.offsets, b.offsets;
    return ConvexPolytope::from_halfspaces(h);
}

ChebyshevBall chebyshev_ball(const ConvexPolytope& p) { return chebyshev_ball(p.require_halfspaces()); }

ChebyshevBall chebyshev_ball(const Halfspaces& h) {
    const Index d = h.normals.cols();
    LpProblem lp;
    lp.objective = Vector::Zero(d + 1);
    lp.objective(d) = 1.0;
    lp.lower.assign(static_cast<std::size_t>(d + 1), std::nullopt);
    lp.upper.assign(static_cast<std::size_t>(d + 1), std::nullopt);
    lp.lower[static_cast<std::size_t>(d)] = 0.0;
    for (Index i = 0; i < h.size(); ++i) {
        Vector row(d + 1);
        row.head(d) = h.normals.row(i).transpose();
        row(d) = h.normals.row(i).norm();
        lp.add(row, Relation::LessEqual, h.offsets(i));
    }
    const LpResult res = lp_solve(lp);
    if (!res.optimal()) {
        if (res.status == LpStatus::Unbounded) throw DegenerateIntersection("halfspace set is unbounded");
        throw DegenerateIntersection("halfspace set is empty");
    }
    return {res.point.head(d), res.point(d)};
}

double interior_margin(const ConvexPolytope& p, const Vector& x) {
    const Halfspaces& h = p.require_halfspaces();
    return -h.max_violation(x);
}

ConvexPolytope shrink(const ConvexPolytope& p, double margin) {
    Halfspaces h = p.require_halfspaces();
    h.offsets.array() -= margin;
    return ConvexPolytope::from_halfspaces(h);
}

double max_vertex_norm(const ConvexPolytope& p) { return p.vertices().colwise().norm().maxCoeff(); }

}  // namespace invpress
