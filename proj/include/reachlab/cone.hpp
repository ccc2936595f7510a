#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "reachlab/common.hpp"

namespace reachlab {

// Closed polyhedral cone with apex at the origin.
//
// The convex case carries a dual pair of descriptions:
//   C = positive hull of `generators`  =  {x : <f, x> <= 0 for f in facet_normals}.
// Lineality shows up as +-v pairs among the generators.
//
// The complement flavour (n = 2 only) represents the closure of the
// complement of the convex cone described by the same data; it is what the
// tangent cone at a reentrant polygon vertex looks like.  Such a cone is the
// union of the half-planes {<f_i, x> >= 0}, which is how membership and
// distance are evaluated.
struct PolyhedralCone {
    int ambient_dim = 0;
    std::vector<Vec> generators;
    std::vector<Vec> facet_normals;
    int lin_dim = 0;
    bool is_complement = false;

    bool contains(const Vec& x, double tol = 1e-9) const {
        check_dim(x, ambient_dim, "cone membership");
        if (is_complement) {
            for (const Vec& f : facet_normals)
                if (dot(f, x) >= -tol) return true;
            return facet_normals.empty();
        }
        for (const Vec& f : facet_normals)
            if (dot(f, x) > tol) return false;
        return true;
    }
};

namespace detail {

inline bool same_direction(const Vec& a, const Vec& b, double tol = 1e-9) {
    return dist(a, b) < tol;
}

inline void push_unique_dir(std::vector<Vec>& out, const Vec& d) {
    for (const Vec& e : out)
        if (same_direction(e, d)) return;
    out.push_back(d);
}

// Enumerates all (k)-subsets of {0..m-1} and calls fn on each.
template <class Fn>
void for_each_subset(int m, int k, Fn&& fn) {
    if (k < 0 || k > m) return;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace detail

// Extreme rays (plus a +-basis of the lineality space) of the H-described
// cone {x : <f, x> <= 0 for f in normals}.  Exact for the small cones that
// arise as tangent/normal cones of the supported shapes.
inline std::vector<Vec> cone_rays_from_normals(int n, const std::vector<Vec>& normals) {
    std::vector<Vec> rays;
    std::vector<Vec> span_basis = orthonormal_basis(normals);
    const int r = static_cast<int>(span_basis.size());

    // Lineality: orthogonal complement of span(normals).
    std::vector<Vec> lin;
    for (int i = 0; i < n; ++i) {
        Vec e = basis_vector(n, i);
        for (const Vec& b : span_basis) axpy(e, -dot(e, b), b);
        for (const Vec& b : lin) axpy(e, -dot(e, b), b);
        double ne = norm(e);
        if (ne > 1e-9) lin.push_back(scaled(e, 1.0 / ne));
    }
    for (const Vec& l : lin) {
        detail::push_unique_dir(rays, l);
        detail::push_unique_dir(rays, scaled(l, -1.0));
    }
    if (r == 0) return rays;  // whole space

    // Work inside span(normals): coordinates of the normals in that basis.
    std::vector<Vec> fr;
    fr.reserve(normals.size());
    for (const Vec& f : normals) {
        Vec c(r);
        for (int j = 0; j < r; ++j) c[j] = dot(f, span_basis[j]);
        fr.push_back(std::move(c));
    }

    auto lift = [&](const Vec& c) {
        Vec v = zeros(n);
        for (int j = 0; j < r; ++j) axpy(v, c[j], span_basis[j]);
        return v;
    };
    auto feasible = [&](const Vec& c) {
        for (const Vec& f : fr)
            if (dot(f, c) > 1e-9) return false;
        return true;
    };

    if (r == 1) {
        Vec c{1.0};
        if (feasible(c)) detail::push_unique_dir(rays, lift(c));
        c[0] = -1.0;
        if (feasible(c)) detail::push_unique_dir(rays, lift(c));
        return rays;
    }

    const int m = static_cast<int>(fr.size());
    detail::for_each_subset(m, r - 1, [&](const std::vector<int>& idx) {
        std::vector<Vec> sel;
        for (int i : idx) sel.push_back(fr[i]);
        std::vector<Vec> sb = orthonormal_basis(sel);
        if (static_cast<int>(sb.size()) != r - 1) return;  // not a ray-defining subset
        // direction orthogonal to sel within R^r
        for (int i = 0; i < r; ++i) {
            Vec e = basis_vector(r, i);
            for (const Vec& b : sb) axpy(e, -dot(e, b), b);
            double ne = norm(e);
            if (ne < 1e-9) continue;
            Vec d = scaled(e, 1.0 / ne);
            if (feasible(d)) detail::push_unique_dir(rays, lift(d));
            Vec dm = scaled(d, -1.0);
            if (feasible(dm)) detail::push_unique_dir(rays, lift(dm));
            break;
        }
    });
    return rays;
}

// Convex cone from an H-description.
inline PolyhedralCone cone_from_normals(int n, std::vector<Vec> normals) {
    PolyhedralCone c;
    c.ambient_dim = n;
    for (Vec& f : normals) f = normalized(f);
    std::vector<Vec> dedup;
    for (const Vec& f : normals) detail::push_unique_dir(dedup, f);
    c.facet_normals = std::move(dedup);
    c.generators = cone_rays_from_normals(n, c.facet_normals);
    c.lin_dim = static_cast<int>(orthonormal_basis(c.generators).size());
    return c;
}

// Convex cone from generators; the facet description is the generator set of
// the dual cone.
inline PolyhedralCone cone_from_generators(int n, std::vector<Vec> gens) {
    PolyhedralCone c;
    c.ambient_dim = n;
    for (Vec& g : gens) g = normalized(g);
    std::vector<Vec> dedup;
    for (const Vec& g : gens) detail::push_unique_dir(dedup, g);
    c.generators = std::move(dedup);
    c.facet_normals = cone_rays_from_normals(n, c.generators);
    c.lin_dim = static_cast<int>(orthonormal_basis(c.generators).size());
    return c;
}

// Dual(C) = {v : <v,u> <= 0 for all u in C}.
inline PolyhedralCone dual_cone(const PolyhedralCone& c) {
    if (c.is_complement) throw UnsupportedOperation("dual of a complement cone");
    return cone_from_normals(c.ambient_dim, c.generators);
}

// Exact nearest point of a convex polyhedral cone: the projection lies in
// the relative interior of some face, i.e. on the subspace orthogonal to an
// active subset of facet normals.  All subsets are enumerated (the cones we
// meet have at most a handful of facets).
inline Vec project_convex_cone(const PolyhedralCone& c, const Vec& x) {
    const auto& F = c.facet_normals;
    const int m = static_cast<int>(F.size());
    if (m > 16) throw UnsupportedOperation("cone projection: too many facets");
    Vec best;
    double best_d = -1.0;
    for (int mask = 0; mask < (1 << m); ++mask) {
        std::vector<Vec> active;
        for (int i = 0; i < m; ++i)
            if (mask & (1 << i)) active.push_back(F[i]);
        std::vector<Vec> basis = orthonormal_basis(active);
        Vec p = x;
        for (const Vec& b : basis) axpy(p, -dot(p, b), b);
        if (!c.contains(p, 1e-9 * (1.0 + norm(x)))) continue;
        double d = dist(x, p);
        if (best_d < 0.0 || d < best_d) {
            best_d = d;
            best = p;
        }
    }
    if (best_d < 0.0) throw NumericalError("cone projection failed");
    return best;
}

// Distance to C intersected with the closed ball of radius `window`.  For a
// cone, the nearest point of the intersection is the radial clipping of the
// cone projection; complement cones decompose into convex half-planes.
inline double cone_window_distance(const PolyhedralCone& c, const Vec& x, double window) {
    auto clip_dist = [&](Vec p) {
        double np = norm(p);
        if (np > window) p = scaled(p, window / np);
        return dist(x, p);
    };
    if (!c.is_complement) return clip_dist(project_convex_cone(c, x));
    double best = -1.0;
    for (const Vec& f : c.facet_normals) {
        // component half-plane {<f, y> >= 0}
        Vec p = x;
        double v = dot(f, p);
        if (v < 0.0) axpy(p, -v, f);
        double d = clip_dist(p);
        if (best < 0.0 || d < best) best = d;
    }
    if (best < 0.0) throw NumericalError("complement cone has no components");
    return best;
}

}  // namespace reachlab
