#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "reachlab/cone.hpp"
#include "reachlab/polytope.hpp"
#include "reachlab/shape.hpp"

namespace reachlab {

// One element of the boundary stratum decomposition: for positive-reach
// shapes, dim(normal cone) = n - dim.  Nonconvex polygons are stratified
// combinatorially; reentrant vertices get a trivial normal cone, external
// angle 0 and a wedge angle > pi, and the owning StrataResult carries
// reach = 0 so downstream consumers can refuse them.
struct FaceStratum {
    int dim = 0;
    double measure = 0.0;
    Vec representative;
    PolyhedralCone tangent_cone;
    PolyhedralCone normal_cone;
    double external_angle = 0.0;
    double external_angle_stderr = 0.0;
    std::optional<double> wedge_angle;   // interior angle, codimension-2 strata
    std::vector<Vec> face_points;        // polytope faces: their vertices
};

struct StrataResult {
    std::vector<FaceStratum> strata;
    double reach = 0.0;
};

namespace detail {

inline PolyhedralCone halfspace_tangent(int n, const Vec& outward_normal) {
    return cone_from_normals(n, {outward_normal});
}

inline PolyhedralCone ray_normal(int n, const Vec& outward_normal) {
    return cone_from_generators(n, {outward_normal});
}

inline PolyhedralCone trivial_cone(int n) {
    PolyhedralCone c;
    c.ambient_dim = n;
    c.lin_dim = 0;
    for (int i = 0; i < n; ++i) {
        c.facet_normals.push_back(basis_vector(n, i, 1.0));
        c.facet_normals.push_back(basis_vector(n, i, -1.0));
    }
    return c;
}

// Tangent cone at a polygon vertex; reentrant vertices yield the closure of
// the complement of the exterior wedge.
inline PolyhedralCone polygon_vertex_tangent(const Shape::PolygonData& pg, std::size_t i) {
    const std::size_t m = pg.vertices.size();
    const Vec& prev = pg.vertices[(i + m - 1) % m];
    const Vec& cur = pg.vertices[i];
    const Vec& next = pg.vertices[(i + 1) % m];
    Vec d_back = normalized(sub(prev, cur));
    Vec d_fwd = normalized(sub(next, cur));
    double theta = polygon_interior_angle(pg, i);
    if (theta <= std::numbers::pi) return cone_from_generators(2, {d_back, d_fwd});
    PolyhedralCone exterior = cone_from_generators(2, {d_back, d_fwd});
    exterior.is_complement = true;
    exterior.lin_dim = 2;
    return exterior;
}

inline Vec polygon_edge_outward_normal(const Shape::PolygonData& pg, std::size_t i) {
    const std::size_t m = pg.vertices.size();
    Vec e = sub(pg.vertices[(i + 1) % m], pg.vertices[i]);
    return normalized(Vec{e[1], -e[0]});  // CCW polygon: right of the edge is outside
}

}  // namespace detail

// Tangent cone Tan(E, x) at a boundary point.
inline PolyhedralCone tangent_cone(const Shape& shape, const Vec& x, double tol = 1e-9) {
    const int n = shape.ambient_dim();
    check_dim(x, n, "tangent_cone");
    if (!shape.on_boundary(x, tol))
        throw ValidationError("tangent_cone: point is not on the boundary");
    switch (shape.kind()) {
        case Shape::Kind::ball:
            return detail::halfspace_tangent(n, normalized(sub(x, shape.as_ball().center)));
        case Shape::Kind::polytope:
            return shape.as_polytope().tangent_cone_at(x, tol * shape.length_scale());
        case Shape::Kind::rounded_polytope: {
            const auto& r = shape.as_rounded();
            double dc = r.core.distance(x);
            if (dc > tol * shape.length_scale()) {
                Vec pc = r.core.project(x);
                return detail::halfspace_tangent(n, scaled(sub(x, pc), 1.0 / dc));
            }
            // x on a core facet plane: smooth boundary point of the offset facet
            return r.core.tangent_cone_at(x, tol * shape.length_scale());
        }
        case Shape::Kind::disjoint_union: {
            for (const Shape& p : shape.as_union().parts)
                if (p.on_boundary(x, tol)) return tangent_cone(p, x, tol);
            throw ValidationError("tangent_cone: point not on any union part");
        }
        case Shape::Kind::polygon: {
            const auto& pg = shape.as_polygon();
            const double stol = tol * shape.length_scale();
            for (std::size_t i = 0; i < pg.vertices.size(); ++i)
                if (dist(x, pg.vertices[i]) <= stol * 10)
                    return detail::polygon_vertex_tangent(pg, i);
            // nearest edge
            std::size_t best = 0;
            double bd = std::numeric_limits<double>::infinity();
            const std::size_t m = pg.vertices.size();
            for (std::size_t i = 0; i < m; ++i) {
                Vec a = pg.vertices[i], b = pg.vertices[(i + 1) % m];
                Vec ab = sub(b, a);
                double tt = std::clamp(dot(sub(x, a), ab) / norm_sq(ab), 0.0, 1.0);
                Vec pr = a;
                axpy(pr, tt, ab);
                double d = dist(x, pr);
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
            return detail::halfspace_tangent(2, detail::polygon_edge_outward_normal(pg, best));
        }
    }
    throw NumericalError("unreachable");
}

// Normal cone Nor(E, x) = Dual(Tan(E, x)).
inline PolyhedralCone normal_cone(const Shape& shape, const Vec& x, double tol = 1e-9) {
    PolyhedralCone tan = tangent_cone(shape, x, tol);
    if (tan.is_complement) return detail::trivial_cone(shape.ambient_dim());
    return dual_cone(tan);
}

// Boundary stratification of a shape.
inline StrataResult boundary_strata(const Shape& shape, std::uint64_t mc_samples = 10'000'000,
                                    std::uint64_t seed = 7) {
    const int n = shape.ambient_dim();
    StrataResult out;
    out.reach = shape.reach();
    switch (shape.kind()) {
        case Shape::Kind::ball: {
            const Ball& b = shape.as_ball();
            FaceStratum s;
            s.dim = n - 1;
            s.measure = n * unit_ball_volume(n) * std::pow(b.radius, n - 1);
            s.representative = b.center;
            s.representative[0] += b.radius;
            Vec nu = basis_vector(n, 0);
            s.tangent_cone = detail::halfspace_tangent(n, nu);
            s.normal_cone = detail::ray_normal(n, nu);
            s.external_angle = 0.5;
            out.strata.push_back(std::move(s));
            return out;
        }
        case Shape::Kind::polytope: {
            const ConvexPolytope& p = shape.as_polytope();
            for (const auto& f : p.faces()) {
                FaceStratum s;
                s.dim = f.dim;
                s.measure = f.measure;
                s.representative = f.centroid;
                std::vector<Vec> act;
                for (int i : f.active) act.push_back(p.halfspaces()[i].normal);
                s.tangent_cone = cone_from_normals(n, act);
                s.normal_cone = cone_from_generators(n, act);
                ExternalAngle ea = external_angle(p, f, mc_samples, seed);
                s.external_angle = ea.value;
                s.external_angle_stderr = ea.stderr_value;
                if (f.dim == n - 2) s.wedge_angle = wedge_angle(p, f);
                s.face_points = p.face_points(f);
                out.strata.push_back(std::move(s));
            }
            return out;
        }
        case Shape::Kind::rounded_polytope: {
            const auto& r = shape.as_rounded();
            const ConvexPolytope& core = r.core;
            FaceStratum s;
            s.dim = n - 1;
            s.measure = 0.0;
            for (int k = 0; k <= n - 1; ++k)
                s.measure += (n - k) * unit_ball_volume(n - k) * curvature_measure(core, k) *
                             std::pow(r.rounding, n - 1 - k);
            const auto facets = core.faces_of_dim(n - 1);
            const Vec& nu = core.halfspaces()[facets[0]->active[0]].normal;
            s.representative = add(facets[0]->centroid, scaled(nu, r.rounding));
            s.tangent_cone = detail::halfspace_tangent(n, nu);
            s.normal_cone = detail::ray_normal(n, nu);
            s.external_angle = 0.5;
            out.strata.push_back(std::move(s));
            return out;
        }
        case Shape::Kind::disjoint_union: {
            for (const Shape& p : shape.as_union().parts) {
                StrataResult part = boundary_strata(p, mc_samples, seed);
                for (auto& s : part.strata) out.strata.push_back(std::move(s));
            }
            return out;
        }
        case Shape::Kind::polygon: {
            const auto& pg = shape.as_polygon();
            const std::size_t m = pg.vertices.size();
            for (std::size_t i = 0; i < m; ++i) {  // edges
                FaceStratum s;
                s.dim = 1;
                const Vec& a = pg.vertices[i];
                const Vec& b = pg.vertices[(i + 1) % m];
                s.measure = dist(a, b);
                s.representative = scaled(add(a, b), 0.5);
                Vec nu = detail::polygon_edge_outward_normal(pg, i);
                s.tangent_cone = detail::halfspace_tangent(2, nu);
                s.normal_cone = detail::ray_normal(2, nu);
                s.external_angle = 0.5;
                s.face_points = {a, b};
                out.strata.push_back(std::move(s));
            }
            for (std::size_t i = 0; i < m; ++i) {  // vertices
                FaceStratum s;
                s.dim = 0;
                s.measure = 1.0;
                s.representative = pg.vertices[i];
                double theta = polygon_interior_angle(pg, i);
                s.wedge_angle = theta;
                s.tangent_cone = detail::polygon_vertex_tangent(pg, i);
                if (theta < std::numbers::pi) {
                    s.normal_cone = dual_cone(s.tangent_cone);
                    s.external_angle = (std::numbers::pi - theta) / (2.0 * std::numbers::pi);
                } else {
                    s.normal_cone = detail::trivial_cone(2);
                    s.external_angle = 0.0;
                }
                s.face_points = {pg.vertices[i]};
                out.strata.push_back(std::move(s));
            }
            return out;
        }
    }
    throw NumericalError("unreachable");
}

// H^{n-1} of the boundary (sum of top-dimensional stratum measures).
inline double perimeter(const Shape& shape) {
    double p = 0.0;
    StrataResult sr = boundary_strata(shape, 0, 0);  // exact paths never sample
    for (const auto& s : sr.strata)
        if (s.dim == shape.ambient_dim() - 1) p += s.measure;
    return p;
}

// C_k(E, R^n) for polytopes and convex polygons.
inline double curvature_measure_polytope(const Shape& shape, int k) {
    if (shape.kind() == Shape::Kind::polytope) return curvature_measure(shape.as_polytope(), k);
    if (shape.kind() == Shape::Kind::polygon) {
        if (!shape.as_polygon().convex)
            throw UnsupportedOperation(
                "curvature measures require positive reach; nonconvex polygon has reach 0");
        return curvature_measure(ConvexPolytope::from_vertices(shape.as_polygon().vertices), k);
    }
    throw UnsupportedOperation("curvature_measure_polytope expects a polytope");
}

}  // namespace reachlab
