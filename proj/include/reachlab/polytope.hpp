#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

#include "reachlab/common.hpp"
#include "reachlab/cone.hpp"
#include "reachlab/rng.hpp"

namespace reachlab {

// Half-space {x : <normal, x> <= offset}, normal of unit length.
struct Halfspace {
    Vec normal;
    double offset = 0.0;
};

struct PolytopeFace {
    int dim = 0;
    std::vector<int> vertex_ids;   // sorted indices into the vertex list
    std::vector<int> active;       // facet indices whose hyperplane contains the face
    double measure = 0.0;          // H^dim of the face
    Vec centroid;                  // vertex average, lies in the relative interior
};

// Compact convex polytope with nonempty interior in R^n.  Both
// representations plus the full face lattice are built at construction, so
// instances are immutable and cheap to share.
class ConvexPolytope {
public:
    static ConvexPolytope from_vertices(std::vector<Vec> verts) {
        ConvexPolytope p;
        if (verts.empty()) throw ValidationError("polytope: no vertices");
        p.n_ = static_cast<int>(verts[0].size());
        for (const Vec& v : verts) check_dim(v, p.n_, "polytope vertex");
        p.vertices_ = dedup_points(std::move(verts));
        p.build();
        return p;
    }

    static ConvexPolytope from_halfspaces(std::vector<Halfspace> hs) {
        if (hs.empty()) throw ValidationError("polytope: no halfspaces");
        const int n = static_cast<int>(hs[0].normal.size());
        for (Halfspace& h : hs) {
            check_dim(h.normal, n, "halfspace normal");
            double nn = norm(h.normal);
            if (nn < 1e-14) throw ValidationError("halfspace with zero normal");
            h.offset /= nn;
            h.normal = scaled(h.normal, 1.0 / nn);
        }
        // Recession cone must be {0}, otherwise the region is unbounded.
        std::vector<Vec> normals;
        for (const auto& h : hs) normals.push_back(h.normal);
        if (!cone_rays_from_normals(n, normals).empty())
            throw ValidationError("halfspace intersection is unbounded");

        std::vector<Vec> verts;
        const int m = static_cast<int>(hs.size());
        double scale = 1.0;
        for (const auto& h : hs) scale = std::max(scale, std::fabs(h.offset));
        const double tol = 1e-9 * scale;
        detail::for_each_subset(m, n, [&](const std::vector<int>& idx) {
            std::vector<double> A(static_cast<std::size_t>(n) * n);
            Vec b(n);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) A[r * n + c] = hs[idx[r]].normal[c];
                b[r] = hs[idx[r]].offset;
            }
            Vec x;
            if (!solve_linear(std::move(A), std::move(b), x, 1e-10)) return;
            for (const auto& h : hs)
                if (dot(h.normal, x) > h.offset + tol) return;
            verts.push_back(std::move(x));
        });
        if (verts.size() < static_cast<std::size_t>(n) + 1)
            throw ValidationError("halfspace intersection has too few vertices");
        return from_vertices(std::move(verts));
    }

    int ambient_dim() const { return n_; }
    const std::vector<Vec>& vertices() const { return vertices_; }
    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    const std::vector<PolytopeFace>& faces() const { return faces_; }
    double volume() const { return volume_; }
    double geometric_tolerance() const { return tol_; }

    std::vector<const PolytopeFace*> faces_of_dim(int k) const {
        std::vector<const PolytopeFace*> out;
        for (const auto& f : faces_)
            if (f.dim == k) out.push_back(&f);
        return out;
    }

    bool contains(const Vec& x, double tol) const {
        check_dim(x, n_, "polytope membership");
        for (const auto& h : halfspaces_)
            if (dot(h.normal, x) > h.offset + tol) return false;
        return true;
    }

    // min_i (b_i - <a_i, x>): positive inside, negative outside (then only a
    // lower bound on -distance, but the sign is reliable).
    double slack(const Vec& x) const {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& h : halfspaces_) s = std::min(s, h.offset - dot(h.normal, x));
        return s;
    }

    Vec project(const Vec& x) const {
        check_dim(x, n_, "polytope projection");
        if (contains(x, tol_)) return x;
        Vec best;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& f : faces_) {
            Vec p = project_affine(f, x);
            if (!contains(p, tol_)) continue;
            double d = dist(x, p);
            if (d < best_d) {
                best_d = d;
                best = p;
            }
        }
        return best;
    }

    double distance(const Vec& x) const {
        if (contains(x, tol_)) return 0.0;
        return dist(x, project(x));
    }

    std::pair<Vec, Vec> bounding_box() const {
        Vec lo = vertices_[0], hi = vertices_[0];
        for (const Vec& v : vertices_)
            for (int i = 0; i < n_; ++i) {
                lo[i] = std::min(lo[i], v[i]);
                hi[i] = std::max(hi[i], v[i]);
            }
        return {lo, hi};
    }

    ConvexPolytope rescaled(const Vec& x0, double rho) const {
        if (rho <= 0.0) throw ValidationError("rescale: scale must be positive");
        check_dim(x0, n_, "rescale center");
        std::vector<Vec> vs;
        vs.reserve(vertices_.size());
        for (const Vec& v : vertices_) vs.push_back(scaled(sub(v, x0), 1.0 / rho));
        return from_vertices(std::move(vs));
    }

    bool is_axis_aligned_box(Vec* lo = nullptr, Vec* hi = nullptr) const {
        if (halfspaces_.size() != static_cast<std::size_t>(2 * n_)) return false;
        Vec lo_(n_, std::numeric_limits<double>::quiet_NaN()), hi_ = lo_;
        for (const auto& h : halfspaces_) {
            int axis = -1;
            double sign = 0.0;
            for (int i = 0; i < n_; ++i) {
                if (std::fabs(std::fabs(h.normal[i]) - 1.0) < 1e-12) {
                    axis = i;
                    sign = h.normal[i] > 0 ? 1.0 : -1.0;
                } else if (std::fabs(h.normal[i]) > 1e-12) {
                    return false;
                }
            }
            if (axis < 0) return false;
            if (sign > 0)
                hi_[axis] = h.offset;
            else
                lo_[axis] = -h.offset;
        }
        for (int i = 0; i < n_; ++i)
            if (!(lo_[i] < hi_[i])) return false;
        if (lo) *lo = lo_;
        if (hi) *hi = hi_;
        return true;
    }

    Vec interior_point() const { return centroid_; }

    // Slack at the vertex centroid: a lower bound on the inradius.
    double inradius_lower_bound() const { return slack(centroid_); }

    // Tangent cone of feasible directions from a boundary point (active
    // constraints), and its dual.  Throws if x is not on the boundary.
    PolyhedralCone tangent_cone_at(const Vec& x, double boundary_tol = 1e-9) const {
        std::vector<Vec> active = active_normals(x, boundary_tol);
        if (active.empty()) throw ValidationError("point is not on the polytope boundary");
        return cone_from_normals(n_, std::move(active));
    }

    PolyhedralCone normal_cone_at(const Vec& x, double boundary_tol = 1e-9) const {
        std::vector<Vec> active = active_normals(x, boundary_tol);
        if (active.empty()) throw ValidationError("point is not on the polytope boundary");
        return cone_from_generators(n_, std::move(active));
    }

    std::vector<Vec> active_normals(const Vec& x, double boundary_tol = 1e-9) const {
        check_dim(x, n_, "active constraints");
        if (!contains(x, boundary_tol)) throw ValidationError("point is outside the polytope");
        std::vector<Vec> act;
        for (const auto& h : halfspaces_)
            if (std::fabs(h.offset - dot(h.normal, x)) <= boundary_tol * (1.0 + std::fabs(h.offset)))
                act.push_back(h.normal);
        return act;
    }

    std::vector<Vec> face_points(const PolytopeFace& f) const {
        std::vector<Vec> pts;
        pts.reserve(f.vertex_ids.size());
        for (int id : f.vertex_ids) pts.push_back(vertices_[id]);
        return pts;
    }

private:
    int n_ = 0;
    std::vector<Vec> vertices_;
    std::vector<Halfspace> halfspaces_;
    std::vector<PolytopeFace> faces_;
    Vec centroid_;
    double volume_ = 0.0;
    double tol_ = 1e-9;

    static std::vector<Vec> dedup_points(std::vector<Vec> pts) {
        double scale = 1.0;
        for (const Vec& p : pts)
            for (double c : p) scale = std::max(scale, std::fabs(c));
        const double tol = 1e-9 * scale;
        std::vector<Vec> out;
        for (Vec& p : pts) {
            bool dup = false;
            for (const Vec& q : out)
                if (dist(p, q) < tol) {
                    dup = true;
                    break;
                }
            if (!dup) out.push_back(std::move(p));
        }
        return out;
    }

    Vec project_affine(const PolytopeFace& f, const Vec& x) const {
        const Vec& v0 = vertices_[f.vertex_ids[0]];
        std::vector<Vec> dirs;
        for (std::size_t i = 1; i < f.vertex_ids.size(); ++i)
            dirs.push_back(sub(vertices_[f.vertex_ids[i]], v0));
        Vec p = v0;
        Vec d = sub(x, v0);
        for (const Vec& b : orthonormal_basis(dirs)) axpy(p, dot(d, b), b);
        return p;
    }

    void build() {
        double scale = 1.0;
        for (const Vec& v : vertices_)
            for (double c : v) scale = std::max(scale, std::fabs(c));
        tol_ = 1e-9 * scale;

        if (affine_rank(vertices_, tol_) < n_)
            throw ValidationError("degenerate polytope: vertices do not span R^n");

        centroid_ = zeros(n_);
        for (const Vec& v : vertices_) axpy(centroid_, 1.0 / vertices_.size(), v);

        enumerate_facets();
        drop_non_extreme_vertices();
        build_face_lattice();
        compute_measures();
        volume_ = body_volume();
        if (volume_ <= 0.0) throw ValidationError("polytope has empty interior");
    }

    // Supporting hyperplanes through n affinely independent vertices with the
    // whole vertex set on one side.
    void enumerate_facets() {
        const int m = static_cast<int>(vertices_.size());
        if (m < n_ + 1) throw ValidationError("polytope needs at least n+1 vertices");
        std::vector<Halfspace> found;
        detail::for_each_subset(m, n_, [&](const std::vector<int>& idx) {
            std::vector<Vec> dirs;
            for (int i = 1; i < n_; ++i) dirs.push_back(sub(vertices_[idx[i]], vertices_[idx[0]]));
            std::vector<Vec> basis = orthonormal_basis(dirs, tol_);
            if (static_cast<int>(basis.size()) != n_ - 1) return;
            Vec normal;
            for (int i = 0; i < n_; ++i) {
                Vec e = basis_vector(n_, i);
                for (const Vec& b : basis) axpy(e, -dot(e, b), b);
                double ne = norm(e);
                if (ne > 0.5) {  // well-conditioned complement direction
                    normal = scaled(e, 1.0 / ne);
                    break;
                }
                if (i == n_ - 1 && ne > 1e-9) normal = scaled(e, 1.0 / ne);
            }
            if (normal.empty()) return;
            double b0 = dot(normal, vertices_[idx[0]]);
            bool above = false, below = false;
            for (const Vec& v : vertices_) {
                double s = dot(normal, v) - b0;
                if (s > tol_) above = true;
                if (s < -tol_) below = true;
            }
            if (above && below) return;
            if (above) {  // orient outward
                normal = scaled(normal, -1.0);
                b0 = -b0;
            }
            for (const auto& h : found)
                if (dist(h.normal, normal) < 1e-8 && std::fabs(h.offset - b0) < tol_ * 10) return;
            found.push_back({normal, b0});
        });
        if (found.size() < static_cast<std::size_t>(n_) + 1)
            throw ValidationError("facet enumeration failed (degenerate input?)");
        halfspaces_ = std::move(found);
    }

    void drop_non_extreme_vertices() {
        // A point of the input that lies on fewer than n facets is interior
        // to the hull or interior to a face; either way it is not a vertex.
        std::vector<Vec> keep;
        for (const Vec& v : vertices_) {
            int cnt = 0;
            for (const auto& h : halfspaces_)
                if (std::fabs(h.offset - dot(h.normal, v)) <= tol_ * 10) ++cnt;
            if (cnt >= n_) keep.push_back(v);
        }
        vertices_ = std::move(keep);
    }

    void build_face_lattice() {
        const int nf = static_cast<int>(halfspaces_.size());
        const int nv = static_cast<int>(vertices_.size());
        std::vector<std::vector<int>> facet_verts(nf);
        for (int i = 0; i < nf; ++i)
            for (int v = 0; v < nv; ++v)
                if (std::fabs(halfspaces_[i].offset - dot(halfspaces_[i].normal, vertices_[v])) <= tol_ * 10)
                    facet_verts[i].push_back(v);

        std::map<std::vector<int>, PolytopeFace> by_verts;
        std::vector<std::vector<int>> queue;
        auto add_face = [&](std::vector<int> vset) {
            if (vset.empty()) return;
            if (by_verts.count(vset)) return;
            PolytopeFace f;
            f.vertex_ids = vset;
            for (int i = 0; i < nf; ++i)
                if (std::includes(facet_verts[i].begin(), facet_verts[i].end(), vset.begin(), vset.end()))
                    f.active.push_back(i);
            std::vector<Vec> pts;
            for (int id : vset) pts.push_back(vertices_[id]);
            f.dim = affine_rank(pts, tol_);
            f.centroid = zeros(n_);
            for (const Vec& p : pts) axpy(f.centroid, 1.0 / pts.size(), p);
            by_verts.emplace(vset, std::move(f));
            queue.push_back(std::move(vset));
        };
        for (int i = 0; i < nf; ++i) add_face(facet_verts[i]);
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            std::vector<int> cur = queue[qi];
            for (int j = 0; j < nf; ++j) {
                std::vector<int> inter;
                std::set_intersection(cur.begin(), cur.end(), facet_verts[j].begin(),
                                      facet_verts[j].end(), std::back_inserter(inter));
                if (!inter.empty() && inter != cur) add_face(std::move(inter));
            }
        }
        faces_.clear();
        for (auto& [k, f] : by_verts) faces_.push_back(std::move(f));
        std::sort(faces_.begin(), faces_.end(),
                  [](const PolytopeFace& a, const PolytopeFace& b) { return a.dim < b.dim; });
    }

    double flat_volume(const std::vector<int>& vset, int dim,
                       std::map<std::vector<int>, double>& memo) const {
        if (dim == 0) return 1.0;
        if (dim == 1) {
            // endpoints are the extreme points of the segment
            double best = 0.0;
            for (std::size_t i = 0; i < vset.size(); ++i)
                for (std::size_t j = i + 1; j < vset.size(); ++j)
                    best = std::max(best, dist(vertices_[vset[i]], vertices_[vset[j]]));
            return best;
        }
        auto it = memo.find(vset);
        if (it != memo.end()) return it->second;
        Vec c = zeros(n_);
        for (int id : vset) axpy(c, 1.0 / vset.size(), vertices_[id]);
        double total = 0.0;
        for (const auto& g : faces_) {
            if (g.dim != dim - 1) continue;
            if (!std::includes(vset.begin(), vset.end(), g.vertex_ids.begin(), g.vertex_ids.end()))
                continue;
            if (g.vertex_ids == vset) continue;
            const Vec& g0 = vertices_[g.vertex_ids[0]];
            std::vector<Vec> dirs;
            for (std::size_t i = 1; i < g.vertex_ids.size(); ++i)
                dirs.push_back(sub(vertices_[g.vertex_ids[i]], g0));
            Vec d = sub(c, g0);
            for (const Vec& b : orthonormal_basis(dirs, tol_)) axpy(d, -dot(d, b), b);
            total += norm(d) * g.measure;
        }
        total /= dim;
        memo.emplace(vset, total);
        return total;
    }

    void compute_measures() {
        std::map<std::vector<int>, double> memo;
        for (auto& f : faces_) {
            f.measure = flat_volume(f.vertex_ids, f.dim, memo);
            memo[f.vertex_ids] = f.measure;
        }
    }

    double body_volume() const {
        // (1/n) sum over facets of distance(centroid, facet plane) * area
        double total = 0.0;
        for (const auto& f : faces_) {
            if (f.dim != n_ - 1) continue;
            const auto& h = halfspaces_[f.active[0]];
            total += (h.offset - dot(h.normal, centroid_)) * f.measure;
        }
        return total / n_;
    }
};

// ---------------------------------------------------------------------------
// External angles and curvature measures of convex polytopes
// ---------------------------------------------------------------------------

// Area of a convex spherical polygon on S^2 given its cyclically ordered
// vertices (unit vectors), via the angle-excess formula.
inline double spherical_polygon_area(const std::vector<Vec>& verts) {
    const int m = static_cast<int>(verts.size());
    if (m < 3) throw ValidationError("spherical polygon needs >= 3 vertices");
    double angle_sum = 0.0;
    for (int i = 0; i < m; ++i) {
        const Vec& a = verts[(i + m - 1) % m];
        const Vec& b = verts[i];
        const Vec& c = verts[(i + 1) % m];
        Vec ta = sub(a, scaled(b, dot(a, b)));
        Vec tc = sub(c, scaled(b, dot(c, b)));
        double na = norm(ta), nc = norm(tc);
        if (na < 1e-13 || nc < 1e-13) throw NumericalError("degenerate spherical polygon");
        double cosang = std::clamp(dot(ta, tc) / (na * nc), -1.0, 1.0);
        angle_sum += std::acos(cosang);
    }
    return angle_sum - (m - 2) * std::numbers::pi;
}

// Orders the extreme rays of a pointed 3D cone cyclically around its axis.
inline std::vector<Vec> order_rays_cyclically(std::vector<Vec> rays) {
    Vec axis = zeros(3);
    for (const Vec& r : rays) axpy(axis, 1.0, r);
    axis = normalized(axis);
    Vec u;
    {
        Vec e = std::fabs(axis[0]) < 0.9 ? basis_vector(3, 0) : basis_vector(3, 1);
        axpy(e, -dot(e, axis), axis);
        u = normalized(e);
    }
    Vec v = {axis[1] * u[2] - axis[2] * u[1], axis[2] * u[0] - axis[0] * u[2],
             axis[0] * u[1] - axis[1] * u[0]};
    std::sort(rays.begin(), rays.end(), [&](const Vec& a, const Vec& b) {
        return std::atan2(dot(a, v), dot(a, u)) < std::atan2(dot(b, v), dot(b, u));
    });
    return rays;
}

struct ExternalAngle {
    double value = 0.0;
    double stderr_value = 0.0;  // nonzero only for the Monte-Carlo path
};

// External angle of a face: H^{n-1-k}(Nor cap S^{n-1}) normalized by the
// total measure of the unit (n-1-k)-sphere.  Exact for n <= 3 and for the
// two top codimensions in any n; Monte Carlo within span(Nor) otherwise.
inline ExternalAngle external_angle(const ConvexPolytope& poly, const PolytopeFace& face,
                                    std::uint64_t mc_samples = 10'000'000, std::uint64_t seed = 7) {
    const int n = poly.ambient_dim();
    const int k = face.dim;
    std::vector<Vec> act;
    for (int i : face.active) act.push_back(poly.halfspaces()[i].normal);

    if (k == n - 1) return {0.5, 0.0};
    if (k == n - 2) {
        if (act.size() != 2) throw NumericalError("codimension-2 face without exactly 2 facets");
        double g = std::acos(std::clamp(dot(act[0], act[1]), -1.0, 1.0));
        return {g / (2.0 * std::numbers::pi), 0.0};
    }
    if (n == 3 && k == 0) {
        std::vector<Vec> rays = order_rays_cyclically(act);
        return {spherical_polygon_area(rays) / (4.0 * std::numbers::pi), 0.0};
    }

    // Monte Carlo on the unit sphere of span(Nor).
    if (mc_samples == 0)
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()};
    std::vector<Vec> basis = orthonormal_basis(act);
    const int d = static_cast<int>(basis.size());  // = n - k for a k-face
    std::vector<Vec> tan_rays = cone_rays_from_normals(n, act);
    auto in_normal_cone = [&](const Vec& v) {
        for (const Vec& t : tan_rays)
            if (dot(v, t) > 1e-12) return false;
        return true;
    };
    McEstimate est = mc_mean(mc_samples, seed, 0, [&](RngStream& rng) {
        Vec c(d);
        double nn = 0.0;
        do {
            for (int i = 0; i < d; ++i) c[i] = rng.normal();
            nn = norm(c);
        } while (nn < 1e-12);
        Vec v = zeros(n);
        for (int i = 0; i < d; ++i) axpy(v, c[i] / nn, basis[i]);
        return in_normal_cone(v) ? 1.0 : 0.0;
    });
    return {est.mean, est.stderr_of_mean};
}

// Interior wedge angle of a codimension-2 face (dihedral angle between the
// two adjacent facets, measured inside the body).
inline double wedge_angle(const ConvexPolytope& poly, const PolytopeFace& face) {
    if (face.dim != poly.ambient_dim() - 2)
        throw ValidationError("wedge angle is defined for codimension-2 faces");
    std::vector<Vec> act;
    for (int i : face.active) act.push_back(poly.halfspaces()[i].normal);
    if (act.size() != 2) throw NumericalError("codimension-2 face without exactly 2 facets");
    double g = std::acos(std::clamp(dot(act[0], act[1]), -1.0, 1.0));
    return std::numbers::pi - g;
}

// Total curvature measure C_k(E, R^n) = sum over k-faces of
// external_angle * H^k(face); equals the intrinsic volume V_k.
inline double curvature_measure(const ConvexPolytope& poly, int k) {
    const int n = poly.ambient_dim();
    if (k < 0 || k > n - 1) throw ValidationError("curvature measure: k out of range");
    double total = 0.0;
    for (const auto* f : poly.faces_of_dim(k)) total += external_angle(poly, *f).value * f->measure;
    return total;
}

}  // namespace reachlab
