#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "reachlab/common.hpp"
#include "reachlab/polytope.hpp"
#include "reachlab/rng.hpp"

namespace reachlab {

inline constexpr double kInfReach = std::numeric_limits<double>::infinity();

struct Ball {
    Vec center;
    double radius = 0.0;
};

// Closed compact set from the constructive family.  Immutable after
// construction; all operations are const and safe to call concurrently.
class Shape {
public:
    enum class Kind { ball, polytope, rounded_polytope, disjoint_union, polygon };

    struct RoundedData {
        ConvexPolytope core;
        double rounding = 0.0;
    };
    struct UnionData {
        std::vector<Shape> parts;
        double min_separation = 0.0;
    };
    struct PolygonData {
        std::vector<Vec> vertices;  // CCW
        bool convex = false;
        double area = 0.0;
    };

    // -- factories ----------------------------------------------------------

    static Shape ball(Vec center, double radius) {
        if (radius <= 0.0) throw ValidationError("ball: radius must be positive");
        if (center.size() < 2) throw ValidationError("ambient dimension must be >= 2");
        Shape s;
        s.data_ = std::make_shared<Data>(Data{Ball{std::move(center), radius}});
        return s;
    }

    static Shape polytope(ConvexPolytope p) {
        Shape s;
        s.data_ = std::make_shared<Data>(Data{std::move(p)});
        return s;
    }

    static Shape polytope_from_vertices(std::vector<Vec> verts) {
        return polytope(ConvexPolytope::from_vertices(std::move(verts)));
    }

    static Shape polytope_from_halfspaces(std::vector<Halfspace> hs) {
        return polytope(ConvexPolytope::from_halfspaces(std::move(hs)));
    }

    static Shape axis_box(const Vec& lo, const Vec& hi) {
        const int n = static_cast<int>(lo.size());
        std::vector<Halfspace> hs;
        for (int i = 0; i < n; ++i) {
            if (!(lo[i] < hi[i])) throw ValidationError("axis_box: lo < hi required");
            hs.push_back({basis_vector(n, i, 1.0), hi[i]});
            hs.push_back({basis_vector(n, i, -1.0), -lo[i]});
        }
        return polytope_from_halfspaces(std::move(hs));
    }

    static Shape rounded_polytope(ConvexPolytope core, double rounding) {
        if (rounding <= 0.0) throw ValidationError("rounded polytope: rounding must be positive");
        Shape s;
        s.data_ = std::make_shared<Data>(Data{RoundedData{std::move(core), rounding}});
        return s;
    }

    static Shape disjoint_union(std::vector<Shape> parts) {
        if (parts.size() < 2) throw ValidationError("disjoint union needs >= 2 parts");
        const int n = parts[0].ambient_dim();
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (parts[i].ambient_dim() != n)
                throw DimensionMismatch("disjoint union: mixed ambient dimensions");
            if (!parts[i].is_convex())
                throw ValidationError("disjoint union: parts must be convex");
            for (std::size_t j = i + 1; j < parts.size(); ++j)
                min_sep = std::min(min_sep, convex_set_distance(parts[i], parts[j]));
        }
        if (!(min_sep > 1e-12))
            throw ValidationError("disjoint union: parts must have positive pairwise distance");
        Shape s;
        s.data_ = std::make_shared<Data>(Data{UnionData{std::move(parts), min_sep}});
        return s;
    }

    static Shape polygon(std::vector<Vec> verts) {
        PolygonData pd = validate_polygon(std::move(verts));
        Shape s;
        s.data_ = std::make_shared<Data>(Data{std::move(pd)});
        return s;
    }

    // -- basic queries -------------------------------------------------------

    Kind kind() const { return static_cast<Kind>(data_->v.index()); }
    int ambient_dim() const {
        switch (kind()) {
            case Kind::ball: return static_cast<int>(as_ball().center.size());
            case Kind::polytope: return as_polytope().ambient_dim();
            case Kind::rounded_polytope: return as_rounded().core.ambient_dim();
            case Kind::disjoint_union: return as_union().parts[0].ambient_dim();
            case Kind::polygon: return 2;
        }
        return 0;
    }

    const Ball& as_ball() const { return std::get<Ball>(data_->v); }
    const ConvexPolytope& as_polytope() const { return std::get<ConvexPolytope>(data_->v); }
    const RoundedData& as_rounded() const { return std::get<RoundedData>(data_->v); }
    const UnionData& as_union() const { return std::get<UnionData>(data_->v); }
    const PolygonData& as_polygon() const { return std::get<PolygonData>(data_->v); }

    bool is_convex() const {
        switch (kind()) {
            case Kind::ball:
            case Kind::polytope:
            case Kind::rounded_polytope: return true;
            case Kind::disjoint_union: return false;
            case Kind::polygon: return as_polygon().convex;
        }
        return false;
    }

    double membership_tol() const { return 1e-12 * length_scale(); }

    double length_scale() const {
        auto [lo, hi] = bounding_box();
        double s = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i)
            s = std::max({s, std::fabs(lo[i]), std::fabs(hi[i])});
        return s;
    }

    double diameter_bound() const {
        auto [lo, hi] = bounding_box();
        return dist(lo, hi);
    }

    // -- core operations -----------------------------------------------------

    bool contains(const Vec& x) const {
        check_dim(x, ambient_dim(), "contains");
        const double tol = membership_tol();
        switch (kind()) {
            case Kind::ball:
                return dist(x, as_ball().center) <= as_ball().radius + tol;
            case Kind::polytope:
                return as_polytope().contains(x, tol);
            case Kind::rounded_polytope:
                return as_rounded().core.distance(x) <= as_rounded().rounding + tol;
            case Kind::disjoint_union: {
                for (const Shape& p : as_union().parts)
                    if (p.contains(x)) return true;
                return false;
            }
            case Kind::polygon:
                return polygon_contains(as_polygon(), x, tol);
        }
        return false;
    }

    double distance(const Vec& x) const {
        check_dim(x, ambient_dim(), "distance");
        switch (kind()) {
            case Kind::ball:
                return std::max(0.0, dist(x, as_ball().center) - as_ball().radius);
            case Kind::polytope:
                return as_polytope().distance(x);
            case Kind::rounded_polytope:
                return std::max(0.0, as_rounded().core.distance(x) - as_rounded().rounding);
            case Kind::disjoint_union: {
                double d = std::numeric_limits<double>::infinity();
                for (const Shape& p : as_union().parts) d = std::min(d, p.distance(x));
                return d;
            }
            case Kind::polygon: {
                if (polygon_contains(as_polygon(), x, membership_tol())) return 0.0;
                return polygon_boundary_distance(as_polygon(), x);
            }
        }
        return 0.0;
    }

    // Unique nearest point.  Throws AmbiguousProjection when two distinct
    // candidates are equally near (possible beyond the reach).
    Vec project(const Vec& x) const {
        check_dim(x, ambient_dim(), "project");
        switch (kind()) {
            case Kind::ball: {
                const Ball& b = as_ball();
                double d = dist(x, b.center);
                if (d <= b.radius) return x;
                return add(b.center, scaled(sub(x, b.center), b.radius / d));
            }
            case Kind::polytope:
                return as_polytope().project(x);
            case Kind::rounded_polytope: {
                const RoundedData& r = as_rounded();
                double dc = r.core.distance(x);
                if (dc <= r.rounding) return x;
                Vec pc = r.core.project(x);
                return add(pc, scaled(sub(x, pc), r.rounding / dc));
            }
            case Kind::disjoint_union: {
                std::vector<Vec> cands;
                std::vector<double> ds;
                for (const Shape& p : as_union().parts) {
                    Vec q = p.project(x);
                    cands.push_back(q);
                    ds.push_back(dist(x, q));
                }
                return pick_unique_candidate(cands, ds);
            }
            case Kind::polygon: {
                const PolygonData& pg = as_polygon();
                if (polygon_contains(pg, x, membership_tol())) return x;
                std::vector<Vec> cands;
                std::vector<double> ds;
                const std::size_t m = pg.vertices.size();
                for (std::size_t i = 0; i < m; ++i) {
                    Vec q = segment_nearest(pg.vertices[i], pg.vertices[(i + 1) % m], x);
                    cands.push_back(q);
                    ds.push_back(dist(x, q));
                }
                return pick_unique_candidate(cands, ds);
            }
        }
        throw NumericalError("unreachable");
    }

    double reach() const {
        switch (kind()) {
            case Kind::ball:
            case Kind::polytope:
            case Kind::rounded_polytope:
                return kInfReach;
            case Kind::disjoint_union:
                return 0.5 * as_union().min_separation;
            case Kind::polygon:
                return as_polygon().convex ? kInfReach : 0.0;
        }
        return 0.0;
    }

    double volume() const {
        switch (kind()) {
            case Kind::ball: {
                int n = ambient_dim();
                return unit_ball_volume(n) * std::pow(as_ball().radius, n);
            }
            case Kind::polytope:
                return as_polytope().volume();
            case Kind::rounded_polytope: {
                const RoundedData& r = as_rounded();
                return steiner_polynomial(r.core, r.rounding);
            }
            case Kind::disjoint_union: {
                double v = 0.0;
                for (const Shape& p : as_union().parts) v += p.volume();
                return v;
            }
            case Kind::polygon:
                return as_polygon().area;
        }
        return 0.0;
    }

    std::pair<Vec, Vec> bounding_box() const {
        switch (kind()) {
            case Kind::ball: {
                const Ball& b = as_ball();
                Vec lo = b.center, hi = b.center;
                for (std::size_t i = 0; i < lo.size(); ++i) {
                    lo[i] -= b.radius;
                    hi[i] += b.radius;
                }
                return {lo, hi};
            }
            case Kind::polytope:
                return as_polytope().bounding_box();
            case Kind::rounded_polytope: {
                auto [lo, hi] = as_rounded().core.bounding_box();
                for (std::size_t i = 0; i < lo.size(); ++i) {
                    lo[i] -= as_rounded().rounding;
                    hi[i] += as_rounded().rounding;
                }
                return {lo, hi};
            }
            case Kind::disjoint_union: {
                auto [lo, hi] = as_union().parts[0].bounding_box();
                for (const Shape& p : as_union().parts) {
                    auto [l, h] = p.bounding_box();
                    for (std::size_t i = 0; i < lo.size(); ++i) {
                        lo[i] = std::min(lo[i], l[i]);
                        hi[i] = std::max(hi[i], h[i]);
                    }
                }
                return {lo, hi};
            }
            case Kind::polygon: {
                const auto& vs = as_polygon().vertices;
                Vec lo = vs[0], hi = vs[0];
                for (const Vec& v : vs)
                    for (int i = 0; i < 2; ++i) {
                        lo[i] = std::min(lo[i], v[i]);
                        hi[i] = std::max(hi[i], v[i]);
                    }
                return {lo, hi};
            }
        }
        throw NumericalError("unreachable");
    }

    // (E - x0) / rho, staying inside the constructive family.
    Shape rescaled(const Vec& x0, double rho) const {
        if (rho <= 0.0) throw ValidationError("rescale: scale must be positive");
        check_dim(x0, ambient_dim(), "rescale center");
        auto map = [&](const Vec& v) { return scaled(sub(v, x0), 1.0 / rho); };
        switch (kind()) {
            case Kind::ball:
                return ball(map(as_ball().center), as_ball().radius / rho);
            case Kind::polytope:
                return polytope(as_polytope().rescaled(x0, rho));
            case Kind::rounded_polytope:
                return rounded_polytope(as_rounded().core.rescaled(x0, rho),
                                        as_rounded().rounding / rho);
            case Kind::disjoint_union: {
                std::vector<Shape> parts;
                for (const Shape& p : as_union().parts) parts.push_back(p.rescaled(x0, rho));
                return disjoint_union(std::move(parts));
            }
            case Kind::polygon: {
                std::vector<Vec> vs;
                for (const Vec& v : as_polygon().vertices) vs.push_back(map(v));
                return polygon(std::move(vs));
            }
        }
        throw NumericalError("unreachable");
    }

    // Distance from x to the topological boundary (works inside and outside).
    double boundary_distance(const Vec& x) const {
        double dout = distance(x);
        if (dout > 0.0) return dout;
        switch (kind()) {
            case Kind::ball:
                return as_ball().radius - dist(x, as_ball().center);
            case Kind::polytope:
                return std::max(0.0, as_polytope().slack(x));
            case Kind::rounded_polytope:
                return as_rounded().rounding - signed_core_distance(as_rounded(), x);
            case Kind::disjoint_union: {
                double d = std::numeric_limits<double>::infinity();
                for (const Shape& p : as_union().parts)
                    d = std::min(d, p.contains(x) ? p.boundary_distance(x) : p.distance(x));
                return d;
            }
            case Kind::polygon:
                return polygon_boundary_distance(as_polygon(), x);
        }
        return 0.0;
    }

    bool on_boundary(const Vec& x, double tol = 1e-9) const {
        return boundary_distance(x) <= tol * length_scale();
    }

    // i.i.d. uniform points by rejection from the bounding box.
    std::vector<Vec> sample_uniform(std::uint64_t count, std::uint64_t seed) const {
        if (count == 0) throw ValidationError("sample_uniform: count must be >= 1");
        auto [lo, hi] = bounding_box();
        std::vector<Vec> out;
        out.reserve(count);
        RngStream rng(seed, 0);
        std::uint64_t attempts = 0;
        Vec x(lo.size());
        while (out.size() < count) {
            ++attempts;
            for (std::size_t i = 0; i < lo.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
            if (contains(x)) out.push_back(x);
            if (attempts >= 2'000'000 &&
                static_cast<double>(out.size()) < 1e-6 * static_cast<double>(attempts))
                throw RejectionStall("sample_uniform: acceptance rate below 1e-6");
        }
        return out;
    }

    // One uniform point, drawing from a caller-provided stream (used by the
    // chunked Monte-Carlo estimators).
    Vec sample_one(RngStream& rng) const {
        auto [lo, hi] = bounding_box();
        Vec x(lo.size());
        for (std::uint64_t attempts = 1;; ++attempts) {
            for (std::size_t i = 0; i < lo.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
            if (contains(x)) return x;
            if (attempts > 4'000'000) throw RejectionStall("uniform sampling stalled");
        }
    }

    // Lower bound on the inradius (exact for balls and boxes).
    double inradius_lower_bound() const {
        switch (kind()) {
            case Kind::ball:
                return as_ball().radius;
            case Kind::polytope:
                return as_polytope().inradius_lower_bound();
            case Kind::rounded_polytope:
                return as_rounded().core.inradius_lower_bound() + as_rounded().rounding;
            case Kind::disjoint_union: {
                double r = std::numeric_limits<double>::infinity();
                for (const Shape& p : as_union().parts) r = std::min(r, p.inradius_lower_bound());
                return r;
            }
            case Kind::polygon: {
                const PolygonData& pg = as_polygon();
                Vec c = zeros(2);
                for (const Vec& v : pg.vertices) axpy(c, 1.0 / pg.vertices.size(), v);
                if (!polygon_contains(pg, c, 0.0)) return 0.1 * diameter_bound();  // crude fallback
                return polygon_boundary_distance(pg, c);
            }
        }
        return 0.0;
    }

    // Exact distance between two disjoint convex shapes (alternating
    // projections; geometric convergence for compact convex sets).
    static double convex_set_distance(const Shape& a, const Shape& b) {
        Vec x = a.interior_point();
        Vec y = b.project(x);
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 2000; ++it) {
            x = a.project(y);
            y = b.project(x);
            double d = dist(x, y);
            if (prev - d < 1e-14 * (1.0 + d)) return d;
            prev = d;
        }
        return prev;
    }

    Vec interior_point() const {
        switch (kind()) {
            case Kind::ball: return as_ball().center;
            case Kind::polytope: return as_polytope().interior_point();
            case Kind::rounded_polytope: return as_rounded().core.interior_point();
            case Kind::disjoint_union: return as_union().parts[0].interior_point();
            case Kind::polygon: {
                const PolygonData& pg = as_polygon();
                Vec c = zeros(2);
                for (const Vec& v : pg.vertices) axpy(c, 1.0 / pg.vertices.size(), v);
                if (polygon_contains(pg, c, 0.0)) return c;
                // centroid of the first ear as a fallback for nonconvex polygons
                Vec m = zeros(2);
                axpy(m, 1.0 / 3, pg.vertices[0]);
                axpy(m, 1.0 / 3, pg.vertices[1]);
                axpy(m, 1.0 / 3, pg.vertices[2]);
                if (polygon_contains(pg, m, 0.0)) return m;
                throw NumericalError("no interior point found for polygon");
            }
        }
        throw NumericalError("unreachable");
    }

    static double steiner_polynomial(const ConvexPolytope& core, double s);

private:
    struct Data {
        std::variant<Ball, ConvexPolytope, RoundedData, UnionData, PolygonData> v;
    };
    std::shared_ptr<const Data> data_;

    static double signed_core_distance(const RoundedData& r, const Vec& x) {
        double d = r.core.distance(x);
        if (d > 0.0) return d;
        return -std::max(0.0, r.core.slack(x));
    }

    Vec pick_unique_candidate(const std::vector<Vec>& cands,
                              const std::vector<double>& ds) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < ds.size(); ++i)
            if (ds[i] < ds[best]) best = i;
        const double eq_tol = 1e-9 * (1.0 + ds[best]);
        const double sep_tol = 1e-8 * diameter_bound();
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (i == best) continue;
            if (ds[i] <= ds[best] + eq_tol && dist(cands[i], cands[best]) > sep_tol)
                throw AmbiguousProjection("projection is not unique at this point");
        }
        return cands[best];
    }

    static Vec segment_nearest(const Vec& a, const Vec& b, const Vec& x) {
        Vec ab = sub(b, a);
        double t = dot(sub(x, a), ab) / norm_sq(ab);
        t = std::clamp(t, 0.0, 1.0);
        Vec p = a;
        axpy(p, t, ab);
        return p;
    }

    static double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

    static bool polygon_contains(const PolygonData& pg, const Vec& x, double tol) {
        if (tol > 0.0 && polygon_boundary_distance(pg, x) <= tol) return true;
        // half-open crossing rule
        bool inside = false;
        const std::size_t m = pg.vertices.size();
        for (std::size_t i = 0; i < m; ++i) {
            const Vec& a = pg.vertices[i];
            const Vec& b = pg.vertices[(i + 1) % m];
            if ((a[1] > x[1]) != (b[1] > x[1])) {
                double xi = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if (x[0] < xi) inside = !inside;
            }
        }
        return inside;
    }

    static double polygon_boundary_distance(const PolygonData& pg, const Vec& x) {
        double d = std::numeric_limits<double>::infinity();
        const std::size_t m = pg.vertices.size();
        for (std::size_t i = 0; i < m; ++i)
            d = std::min(d, dist(x, segment_nearest(pg.vertices[i], pg.vertices[(i + 1) % m], x)));
        return d;
    }

    static PolygonData validate_polygon(std::vector<Vec> verts) {
        if (verts.size() < 3) throw ValidationError("polygon needs >= 3 vertices");
        for (const Vec& v : verts) check_dim(v, 2, "polygon vertex");
        double scale = 1.0;
        for (const Vec& v : verts) scale = std::max({scale, std::fabs(v[0]), std::fabs(v[1])});
        const double tol = 1e-12 * scale;

        const std::size_t m = verts.size();
        double area2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const Vec& a = verts[i];
            const Vec& b = verts[(i + 1) % m];
            area2 += a[0] * b[1] - a[1] * b[0];
        }
        if (std::fabs(area2) < tol) throw ValidationError("polygon with zero area");
        if (area2 < 0.0) std::reverse(verts.begin(), verts.end());  // normalize to CCW

        for (std::size_t i = 0; i < m; ++i) {
            Vec e1 = sub(verts[(i + 1) % m], verts[i]);
            Vec e2 = sub(verts[(i + 2) % m], verts[(i + 1) % m]);
            if (norm(e1) < tol) throw ValidationError("polygon with repeated vertices");
            if (std::fabs(cross2(e1, e2)) < tol * (norm(e1) * norm(e2)) * 1e3 &&
                dot(e1, e2) > 0.0)
                throw ValidationError("polygon with collinear consecutive vertices");
        }

        // simple (non-self-intersecting) check on non-adjacent edge pairs
        auto segs_intersect = [&](const Vec& p1, const Vec& p2, const Vec& q1, const Vec& q2) {
            auto orient = [&](const Vec& a, const Vec& b, const Vec& c) {
                return cross2(sub(b, a), sub(c, a));
            };
            double o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
            double o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
            return ((o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol)) &&
                   ((o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol));
        };
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                if (j == i + 1 || (i == 0 && j == m - 1)) continue;
                if (segs_intersect(verts[i], verts[(i + 1) % m], verts[j], verts[(j + 1) % m]))
                    throw ValidationError("polygon boundary self-intersects");
            }

        PolygonData pd;
        pd.vertices = std::move(verts);
        pd.area = 0.5 * std::fabs(area2);
        pd.convex = true;
        for (std::size_t i = 0; i < m; ++i) {
            Vec e1 = sub(pd.vertices[(i + 1) % m], pd.vertices[i]);
            Vec e2 = sub(pd.vertices[(i + 2) % m], pd.vertices[(i + 1) % m]);
            if (cross2(e1, e2) < 0.0) pd.convex = false;
        }
        return pd;
    }
};

// vol(core + s B) for s >= 0: the Steiner polynomial of the core.
inline double Shape::steiner_polynomial(const ConvexPolytope& core, double s) {
    const int n = core.ambient_dim();
    double v = core.volume();
    for (int k = 0; k <= n - 1; ++k)
        v += std::pow(s, n - k) * unit_ball_volume(n - k) * curvature_measure(core, k);
    return v;
}

// Interior angle of a CCW polygon at vertex i, in (0, 2*pi).
inline double polygon_interior_angle(const Shape::PolygonData& pg, std::size_t i) {
    const std::size_t m = pg.vertices.size();
    const Vec& prev = pg.vertices[(i + m - 1) % m];
    const Vec& cur = pg.vertices[i];
    const Vec& next = pg.vertices[(i + 1) % m];
    Vec in = sub(cur, prev), out = sub(next, cur);
    double turn = std::atan2(in[0] * out[1] - in[1] * out[0], dot(in, out));
    return std::numbers::pi - turn;
}

// ---------------------------------------------------------------------------
// JSON schema ("type" discriminator); lengths in abstract units.
// ---------------------------------------------------------------------------

inline Vec vec_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("expected a coordinate array");
    Vec v;
    for (const auto& c : j) v.push_back(c.get<double>());
    return v;
}

inline nlohmann::json vec_to_json(const Vec& v) { return nlohmann::json(v); }

inline Shape shape_from_json(const nlohmann::json& j);

inline ConvexPolytope polytope_from_json(const nlohmann::json& j) {
    if (j.contains("vertices")) {
        std::vector<Vec> vs;
        for (const auto& v : j.at("vertices")) vs.push_back(vec_from_json(v));
        return ConvexPolytope::from_vertices(std::move(vs));
    }
    if (j.contains("halfspaces")) {
        std::vector<Halfspace> hs;
        for (const auto& h : j.at("halfspaces"))
            hs.push_back({vec_from_json(h.at("normal")), h.at("offset").get<double>()});
        return ConvexPolytope::from_halfspaces(std::move(hs));
    }
    throw ValidationError("polytope: need \"vertices\" or \"halfspaces\"");
}

inline Shape shape_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "ball")
        return Shape::ball(vec_from_json(j.at("center")), j.at("radius").get<double>());
    if (type == "polytope") return Shape::polytope(polytope_from_json(j));
    if (type == "rounded")
        return Shape::rounded_polytope(polytope_from_json(j.at("core")),
                                       j.at("rounding").get<double>());
    if (type == "union") {
        std::vector<Shape> parts;
        for (const auto& p : j.at("parts")) parts.push_back(shape_from_json(p));
        return Shape::disjoint_union(std::move(parts));
    }
    if (type == "polygon") {
        std::vector<Vec> vs;
        for (const auto& v : j.at("vertices")) vs.push_back(vec_from_json(v));
        return Shape::polygon(std::move(vs));
    }
    throw ValidationError("unknown shape type: " + type);
}

inline nlohmann::json shape_to_json(const Shape& s) {
    nlohmann::json j;
    switch (s.kind()) {
        case Shape::Kind::ball:
            j["type"] = "ball";
            j["center"] = vec_to_json(s.as_ball().center);
            j["radius"] = s.as_ball().radius;
            break;
        case Shape::Kind::polytope: {
            j["type"] = "polytope";
            nlohmann::json vs = nlohmann::json::array();
            for (const Vec& v : s.as_polytope().vertices()) vs.push_back(vec_to_json(v));
            j["vertices"] = vs;
            break;
        }
        case Shape::Kind::rounded_polytope: {
            j["type"] = "rounded";
            nlohmann::json vs = nlohmann::json::array();
            for (const Vec& v : s.as_rounded().core.vertices()) vs.push_back(vec_to_json(v));
            j["core"] = {{"vertices", vs}};
            j["rounding"] = s.as_rounded().rounding;
            break;
        }
        case Shape::Kind::disjoint_union: {
            j["type"] = "union";
            nlohmann::json ps = nlohmann::json::array();
            for (const Shape& p : s.as_union().parts) ps.push_back(shape_to_json(p));
            j["parts"] = ps;
            break;
        }
        case Shape::Kind::polygon: {
            j["type"] = "polygon";
            nlohmann::json vs = nlohmann::json::array();
            for (const Vec& v : s.as_polygon().vertices) vs.push_back(vec_to_json(v));
            j["vertices"] = vs;
            break;
        }
    }
    return j;
}

}  // namespace reachlab
