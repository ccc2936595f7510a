#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachlab/face_quadrature.hpp"
#include "reachlab/quadrature.hpp"
#include "reachlab/rng.hpp"
#include "reachlab/shape.hpp"
#include "reachlab/special.hpp"
#include "reachlab/strata.hpp"

namespace reachlab {

// ---------------------------------------------------------------------------
// Test functions phi in C^1_b
// ---------------------------------------------------------------------------

class TestFunction {
public:
    enum class Kind { constant, linear, quadratic, gaussian_bump };

    static TestFunction constant(double c) {
        TestFunction f;
        f.kind_ = Kind::constant;
        f.c_ = c;
        return f;
    }

    static TestFunction linear(Vec v, double c) {
        TestFunction f;
        f.kind_ = Kind::linear;
        f.v_ = std::move(v);
        f.c_ = c;
        return f;
    }

    // phi(y) = c + <v, y> + y^T A y, A given row-major (symmetrized on input).
    static TestFunction quadratic(std::vector<double> A, Vec v, double c) {
        TestFunction f;
        f.kind_ = Kind::quadratic;
        const std::size_t n = v.size();
        if (A.size() != n * n) throw ValidationError("quadratic test function: A must be n x n");
        f.A_.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) f.A_[i * n + j] = 0.5 * (A[i * n + j] + A[j * n + i]);
        f.v_ = std::move(v);
        f.c_ = c;
        return f;
    }

    static TestFunction gaussian_bump(Vec center, double width, double amplitude) {
        if (width <= 0.0) throw ValidationError("gaussian bump: width must be positive");
        TestFunction f;
        f.kind_ = Kind::gaussian_bump;
        f.center_ = std::move(center);
        f.width_ = width;
        f.c_ = amplitude;
        return f;
    }

    Kind kind() const { return kind_; }
    double constant_value() const { return c_; }
    const Vec& linear_part() const { return v_; }
    const std::vector<double>& quad_matrix() const { return A_; }
    const Vec& bump_center() const { return center_; }
    double bump_width() const { return width_; }

    double operator()(const Vec& y) const {
        switch (kind_) {
            case Kind::constant:
                return c_;
            case Kind::linear:
                return c_ + dot(v_, y);
            case Kind::quadratic: {
                const std::size_t n = y.size();
                double q = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) q += A_[i * n + j] * y[i] * y[j];
                return c_ + dot(v_, y) + q;
            }
            case Kind::gaussian_bump:
                return c_ * std::exp(-norm_sq(sub(y, center_)) / (2.0 * width_ * width_));
        }
        return 0.0;
    }

    Vec gradient(const Vec& y) const {
        switch (kind_) {
            case Kind::constant:
                return zeros(y.size());
            case Kind::linear:
                return v_;
            case Kind::quadratic: {
                const std::size_t n = y.size();
                Vec g = v_;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) g[i] += 2.0 * A_[i * n + j] * y[j];
                return g;
            }
            case Kind::gaussian_bump: {
                double f = (*this)(y);
                Vec g = sub(center_, y);
                return scaled(g, f / (width_ * width_));
            }
        }
        return {};
    }

    double laplacian(const Vec& y) const {
        switch (kind_) {
            case Kind::constant:
            case Kind::linear:
                return 0.0;
            case Kind::quadratic: {
                const std::size_t n = y.size();
                double tr = 0.0;
                for (std::size_t i = 0; i < n; ++i) tr += A_[i * n + i];
                return 2.0 * tr;
            }
            case Kind::gaussian_bump: {
                double w2 = width_ * width_;
                double f = (*this)(y);
                return f * (norm_sq(sub(y, center_)) / (w2 * w2) - y.size() / w2);
            }
        }
        return 0.0;
    }

    // Upper bound on sup |phi| over an axis box.
    double sup_norm_on_box(const std::pair<Vec, Vec>& box) const {
        const auto& [lo, hi] = box;
        switch (kind_) {
            case Kind::constant:
            case Kind::gaussian_bump:
                return std::fabs(c_);
            case Kind::linear: {
                double s = std::fabs(c_);
                for (std::size_t i = 0; i < lo.size(); ++i)
                    s += std::fabs(v_[i]) * std::max(std::fabs(lo[i]), std::fabs(hi[i]));
                return s;
            }
            case Kind::quadratic: {
                const std::size_t n = lo.size();
                double s = std::fabs(c_);
                Vec m(n);
                for (std::size_t i = 0; i < n; ++i) m[i] = std::max(std::fabs(lo[i]), std::fabs(hi[i]));
                for (std::size_t i = 0; i < n; ++i) s += std::fabs(v_[i]) * m[i];
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) s += std::fabs(A_[i * n + j]) * m[i] * m[j];
                return s;
            }
        }
        return 0.0;
    }

    std::string id() const {
        auto fmt = [](double x) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", x);
            return std::string(buf);
        };
        switch (kind_) {
            case Kind::constant:
                return "constant(" + fmt(c_) + ")";
            case Kind::linear: {
                std::string s = "linear([";
                for (std::size_t i = 0; i < v_.size(); ++i) s += (i ? "," : "") + fmt(v_[i]);
                return s + "]," + fmt(c_) + ")";
            }
            case Kind::quadratic:
                return "quadratic(n=" + std::to_string(v_.size()) + ")";
            case Kind::gaussian_bump:
                return "bump(w=" + fmt(width_) + ",a=" + fmt(c_) + ")";
        }
        return "?";
    }

private:
    Kind kind_ = Kind::constant;
    double c_ = 1.0;          // constant / offset / amplitude
    Vec v_;                   // linear part
    std::vector<double> A_;   // quadratic matrix
    Vec center_;              // bump center
    double width_ = 1.0;      // bump width
};

inline TestFunction test_function_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return TestFunction::constant(j.at("c").get<double>());
    if (kind == "linear")
        return TestFunction::linear(vec_from_json(j.at("v")), j.value("c", 0.0));
    if (kind == "quadratic") {
        Vec v = vec_from_json(j.at("v"));
        std::vector<double> A;
        for (const auto& row : j.at("A"))
            for (const auto& e : row) A.push_back(e.get<double>());
        return TestFunction::quadratic(std::move(A), std::move(v), j.value("c", 0.0));
    }
    if (kind == "gaussian_bump")
        return TestFunction::gaussian_bump(vec_from_json(j.at("center")),
                                           j.at("width").get<double>(),
                                           j.value("amplitude", 1.0));
    throw ValidationError("unknown test function kind: " + kind);
}

inline nlohmann::json test_function_to_json(const TestFunction& f) {
    nlohmann::json j;
    switch (f.kind()) {
        case TestFunction::Kind::constant:
            j["kind"] = "constant";
            j["c"] = f.constant_value();
            break;
        case TestFunction::Kind::linear:
            j["kind"] = "linear";
            j["v"] = f.linear_part();
            j["c"] = f.constant_value();
            break;
        case TestFunction::Kind::quadratic: {
            j["kind"] = "quadratic";
            const std::size_t n = f.linear_part().size();
            nlohmann::json A = nlohmann::json::array();
            for (std::size_t i = 0; i < n; ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (std::size_t jx = 0; jx < n; ++jx) row.push_back(f.quad_matrix()[i * n + jx]);
                A.push_back(row);
            }
            j["A"] = A;
            j["v"] = f.linear_part();
            j["c"] = f.constant_value();
            break;
        }
        case TestFunction::Kind::gaussian_bump:
            j["kind"] = "gaussian_bump";
            j["center"] = f.bump_center();
            j["width"] = f.bump_width();
            j["amplitude"] = f.constant_value();
            break;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Heat content estimators.  All take the scale parameter t of the kernel
// e^{-|x-y|^2 / 4 t^2} (semigroup time t^2).
// ---------------------------------------------------------------------------

struct HeatSample {
    double t = 0.0;
    double estimate = 0.0;
    double stderr_value = 0.0;  // 0 for exact oracles
    std::string method;
    std::string phi_id;
};

// Monte Carlo via the Gaussian-step identity: the kernel is the density of
// y + sqrt(2) t Z with Z standard normal, so
//   f_E(t) = vol(E) * E_y[ phi(y) * 1{ y + sqrt(2) t Z not in E } ].
inline HeatSample heat_content_mc(const Shape& shape, const TestFunction& phi, double t,
                                  std::uint64_t n_samples, std::uint64_t seed, int threads = 0) {
    if (!(t > 0.0)) throw ValidationError("heat content: t must be positive");
    const double vol = shape.volume();
    const double step = std::numbers::sqrt2 * t;
    const int n = shape.ambient_dim();
    McEstimate est = mc_mean(n_samples, seed, threads, [&](RngStream& rng) {
        Vec y = shape.sample_one(rng);
        Vec g(n);
        for (int i = 0; i < n; ++i) g[i] = y[i] + step * rng.normal();
        if (shape.contains(g)) return 0.0;
        return phi(y);
    });
    return {t, vol * est.mean, vol * est.stderr_of_mean, "mc", phi.id()};
}

// Contribution to f_E(t) from E^c \ [E]_r (phi weighted), by Monte Carlo.
inline HeatSample heat_content_mc_tail(const Shape& shape, const TestFunction& phi, double t,
                                       double r, std::uint64_t n_samples, std::uint64_t seed,
                                       int threads = 0) {
    if (!(t > 0.0) || !(r > 0.0)) throw ValidationError("heat tail: t and r must be positive");
    const double vol = shape.volume();
    const double step = std::numbers::sqrt2 * t;
    const int n = shape.ambient_dim();
    McEstimate est = mc_mean(n_samples, seed, threads, [&](RngStream& rng) {
        Vec y = shape.sample_one(rng);
        Vec g(n);
        for (int i = 0; i < n; ++i) g[i] = y[i] + step * rng.normal();
        if (shape.contains(g)) return 0.0;
        return shape.distance(g) > r ? phi(y) : 0.0;
    });
    return {t, vol * est.mean, vol * est.stderr_of_mean, "mc", phi.id()};
}

// 1D stay integral I_a(t) = int_0^a int_0^a g_{t^2}(x-y) dy dx
//                         = a erf(a/2t) - (2t/sqrt(pi)) (1 - e^{-a^2/4t^2}).
inline double box_stay_integral(double a, double t) {
    const double u = a / (2.0 * t);
    return a * std::erf(u) - (2.0 * t / std::sqrt(std::numbers::pi)) * (1.0 - std::exp(-u * u));
}

// Exact heat content of an axis-aligned box with phi == 1:
//   f(t) = prod a_i - prod I_{a_i}(t).
inline HeatSample heat_content_box_exact(const Shape& shape, double t) {
    if (!(t > 0.0)) throw ValidationError("heat content: t must be positive");
    Vec lo, hi;
    if (shape.kind() != Shape::Kind::polytope ||
        !shape.as_polytope().is_axis_aligned_box(&lo, &hi))
        throw UnsupportedOperation("box oracle requires an axis-aligned box");
    double vol = 1.0, stay = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        double a = hi[i] - lo[i];
        vol *= a;
        stay *= box_stay_integral(a, t);
    }
    return {t, vol - stay, 0.0, "box_exact", "constant(1)"};
}

// Smooth-boundary oracle: adaptive quadrature of the defining double integral
// for balls (phi == 1), in tube-adapted radial coordinates.  n = 2 uses the
// scaled Bessel kernel, n = 3 the sinh reduction.
inline HeatSample heat_content_ball_quad(const Shape& shape, double t, double tol = 1e-10) {
    if (!(t > 0.0)) throw ValidationError("heat content: t must be positive");
    if (!(tol > 0.0)) throw ValidationError("heat content: tol must be positive");
    if (shape.kind() != Shape::Kind::ball)
        throw UnsupportedOperation("ball oracle requires a ball");
    const int n = shape.ambient_dim();
    const double R = shape.as_ball().radius;
    const double s = t * t;
    const double cap = 40.0;

    auto value_at_order = [&](int order) {
        if (n == 2) {
            const double amax = std::min(R / t, cap);
            const QuadRule& q = gauss_legendre(order);
            double total = 0.0;
            for (int i = 0; i < order; ++i) {
                double a = 0.5 * amax * (1.0 + q.nodes[i]);
                double r = R - t * a;
                double inner = 0.0;
                for (int j = 0; j < order; ++j) {
                    double b = 0.5 * cap * (1.0 + q.nodes[j]);
                    double rho = R + t * b;
                    double e = a + b;
                    inner += q.weights[j] * std::exp(-0.25 * e * e) *
                             bessel_i0_scaled(rho * r / (2.0 * s)) * r * rho;
                }
                total += q.weights[i] * inner * (0.5 * cap);
            }
            return std::numbers::pi * total * (0.5 * amax);
        }
        if (n == 3) {
            const double alpha = 1.0 / (4.0 * s);
            auto radial = [&](double rho) {
                double plus = gaussian_moment(1, 0.0, R, rho, alpha) +
                              rho * gaussian_moment(0, 0.0, R, rho, alpha);
                double minus = gaussian_moment(1, 0.0, R, -rho, alpha) -
                               rho * gaussian_moment(0, 0.0, R, -rho, alpha);
                return plus - minus;
            };
            double total = gl_integrate(
                [&](double b) {
                    double rho = R + t * b;
                    return rho * radial(rho) * t;
                },
                0.0, cap, order);
            return 4.0 * std::numbers::pi / std::sqrt(4.0 * std::numbers::pi * s) * total;
        }
        throw UnsupportedOperation("ball oracle implemented for n = 2, 3");
    };

    double prev = value_at_order(48);
    for (int order : {64, 96, 128, 192}) {
        double cur = value_at_order(order);
        if (std::fabs(cur - prev) <= tol * std::fabs(cur))
            return {t, cur, 0.0, "ball_quad", "constant(1)"};
        prev = cur;
    }
    throw QuadratureError("ball oracle did not converge to requested tolerance");
}

// Upper bound for the heat-content contribution from E^c \ [E]_r:
//   2^{n/2} ||phi||_inf e^{-r^2/(8 t^2)} L^n(E).
inline double tail_bound(const Shape& shape, const TestFunction& phi, double t, double r) {
    if (!(t > 0.0) || r < 0.0) throw ValidationError("tail bound: t > 0, r >= 0");
    const int n = shape.ambient_dim();
    const double sup = phi.sup_norm_on_box(shape.bounding_box());
    return std::pow(2.0, 0.5 * n) * sup * std::exp(-r * r / (8.0 * t * t)) * shape.volume();
}

// Truncation radius making the tail bound a 1e-3 fraction of the first-order
// term (heuristic; capped below the reach when that is finite).
inline double default_truncation_radius(const Shape& shape, const TestFunction& phi, double t) {
    const int n = shape.ambient_dim();
    const double sup = std::max(phi.sup_norm_on_box(shape.bounding_box()), 1e-30);
    const double amp = std::pow(2.0, 0.5 * n) * sup * shape.volume();
    const double target = 1e-3 * (t / std::sqrt(std::numbers::pi)) * perimeter(shape) * sup;
    double ratio = std::max(amp / std::max(target, 1e-300), std::numbers::e);
    double r = t * std::sqrt(8.0 * std::log(ratio));
    r = std::max(r, 4.0 * t);
    if (std::isfinite(shape.reach())) r = std::min(r, 0.9 * shape.reach());
    return r;
}

// ---------------------------------------------------------------------------
// Stratified tube-coordinate evaluation for convex polytopes
// ---------------------------------------------------------------------------

struct TubeOptions {
    int beta_order = 64;
    int angle_order = 32;
    int face_order = 48;
    int slice_order = 24;
    double cap = 30.0;  // truncation of the rescaled Gaussian coordinates
};

namespace tubedetail {

// Closed-form inner integral  int_{ylo}^{yhi} e^{-(w-c)^2/4} q(w) dw  where q
// collects the w-dependence of phi along one axis: q(w) = C0 + C1 w + C2 w^2,
// optionally times a merged Gaussian factor for bump-type phi.
struct AxisPoly {
    double C0 = 0.0, C1 = 0.0, C2 = 0.0;
};

inline double axis_integral(const AxisPoly& p, double ylo, double yhi, double c) {
    double m0 = gaussian_moment(0, ylo, yhi, c);
    double m1 = gaussian_moment(1, ylo, yhi, c);
    double m2 = gaussian_moment(2, ylo, yhi, c);
    double M1 = m1 + c * m0;
    double M2 = m2 + 2.0 * c * m1 + c * c * m0;
    return p.C0 * m0 + p.C1 * M1 + p.C2 * M2;
}

// merged Gaussian: int e^{-(w-c)^2/4} e^{-a2 (w-d)^2} dw
inline double merged_gaussian_integral(double ylo, double yhi, double c, double a2, double d) {
    const double a1 = 0.25;
    const double a = a1 + a2;
    const double mu = (a1 * c + a2 * d) / a;
    const double pref = std::exp(-a1 * a2 * (c - d) * (c - d) / a);
    return pref * gaussian_moment(0, ylo, yhi, mu, a);
}

struct ScaledDomain {
    int n = 0;
    Vec x;                        // base point on the face
    double t = 0.0;
    bool is_box = false;
    Vec lo, hi;                   // rescaled box bounds
    std::vector<Halfspace> hs;    // rescaled halfspaces (general path)
    std::vector<Vec> verts;       // rescaled vertices (slicing breakpoints)
};

inline ScaledDomain make_domain(const ConvexPolytope& poly, const Vec& x, double t,
                                bool box_path, const Vec& box_lo, const Vec& box_hi) {
    ScaledDomain d;
    d.n = poly.ambient_dim();
    d.x = x;
    d.t = t;
    d.is_box = box_path;
    if (box_path) {
        d.lo.resize(d.n);
        d.hi.resize(d.n);
        for (int i = 0; i < d.n; ++i) {
            d.lo[i] = (box_lo[i] - x[i]) / t;
            d.hi[i] = (box_hi[i] - x[i]) / t;
        }
    } else {
        for (const auto& h : poly.halfspaces())
            d.hs.push_back({h.normal, (h.offset - dot(h.normal, x)) / t});
        for (const Vec& v : poly.vertices()) d.verts.push_back(scaled(sub(v, x), 1.0 / t));
    }
    return d;
}

// phi(x + t w) restricted to the line w = base_w + s e_axis, as a quadratic
// polynomial in s (poly kinds only).
inline AxisPoly phi_on_axis(const TestFunction& phi, const Vec& x, double t, const Vec& base_w,
                            int axis) {
    AxisPoly p;
    Vec y0 = x;
    axpy(y0, t, base_w);
    switch (phi.kind()) {
        case TestFunction::Kind::constant:
            p.C0 = phi.constant_value();
            break;
        case TestFunction::Kind::linear:
            p.C0 = phi(y0);
            p.C1 = t * phi.linear_part()[axis];
            break;
        case TestFunction::Kind::quadratic: {
            p.C0 = phi(y0);
            p.C1 = t * phi.gradient(y0)[axis];
            const std::size_t n = y0.size();
            p.C2 = t * t * phi.quad_matrix()[axis * n + axis];
            break;
        }
        case TestFunction::Kind::gaussian_bump:
            throw NumericalError("phi_on_axis does not handle bump kind");
    }
    return p;
}

double gauss_over_domain(const ScaledDomain& D, const Vec& center, const TestFunction& phi,
                         const TubeOptions& opt);

// Box fast path: everything separates per axis.
inline double gauss_over_box(const ScaledDomain& D, const Vec& c, const TestFunction& phi) {
    const int n = D.n;
    std::vector<double> m0(n), M1(n), M2(n);
    for (int i = 0; i < n; ++i) {
        double g0 = gaussian_moment(0, D.lo[i], D.hi[i], c[i]);
        double g1 = gaussian_moment(1, D.lo[i], D.hi[i], c[i]);
        double g2 = gaussian_moment(2, D.lo[i], D.hi[i], c[i]);
        m0[i] = g0;
        M1[i] = g1 + c[i] * g0;
        M2[i] = g2 + 2.0 * c[i] * g1 + c[i] * c[i] * g0;
    }
    auto prod_except = [&](int skip1, int skip2) {
        double p = 1.0;
        for (int i = 0; i < n; ++i)
            if (i != skip1 && i != skip2) p *= m0[i];
        return p;
    };
    switch (phi.kind()) {
        case TestFunction::Kind::constant:
            return phi.constant_value() * prod_except(-1, -1);
        case TestFunction::Kind::linear: {
            double base = phi.constant_value() + dot(phi.linear_part(), D.x);
            double g = base * prod_except(-1, -1);
            for (int i = 0; i < n; ++i)
                g += D.t * phi.linear_part()[i] * M1[i] * prod_except(i, -1);
            return g;
        }
        case TestFunction::Kind::quadratic: {
            const auto& A = phi.quad_matrix();
            Vec b = phi.gradient(D.x);  // v + 2 A x
            double g = phi(D.x) * prod_except(-1, -1);
            for (int i = 0; i < n; ++i) g += D.t * b[i] * M1[i] * prod_except(i, -1);
            for (int i = 0; i < n; ++i) g += D.t * D.t * A[i * n + i] * M2[i] * prod_except(i, -1);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    g += 2.0 * D.t * D.t * A[i * n + j] * M1[i] * M1[j] * prod_except(i, j);
            return g;
        }
        case TestFunction::Kind::gaussian_bump: {
            const double w = phi.bump_width();
            const double a2 = D.t * D.t / (2.0 * w * w);
            double g = phi.constant_value();
            for (int i = 0; i < n; ++i) {
                double d = (phi.bump_center()[i] - D.x[i]) / D.t;
                g *= merged_gaussian_integral(D.lo[i], D.hi[i], c[i], a2, d);
            }
            return g;
        }
    }
    return 0.0;
}

// 2D slicing over a convex polygonal domain described by half-planes.
// `fixed` carries already-fixed trailing coordinates (n = 3 slabs).
inline double gauss_over_polygon_2d(const std::vector<std::array<double, 3>>& hp,
                                    const std::vector<double>& vert_x, const Vec& x, double t,
                                    const Vec& c2 /*center in the two sliced axes*/,
                                    const Vec& base_w /*w with the two axes zeroed*/,
                                    int ax0, int ax1, const TestFunction& phi,
                                    const TubeOptions& opt) {
    double xlo = c2[0] - opt.cap, xhi = c2[0] + opt.cap;
    std::vector<double> brk{xlo, xhi};
    for (double vx : vert_x)
        if (vx > xlo && vx < xhi) brk.push_back(vx);
    std::sort(brk.begin(), brk.end());

    const QuadRule& q = gauss_legendre(opt.slice_order);
    const double bump_a2 = phi.kind() == TestFunction::Kind::gaussian_bump
                               ? t * t / (2.0 * phi.bump_width() * phi.bump_width())
                               : 0.0;
    double total = 0.0;
    for (std::size_t seg = 0; seg + 1 < brk.size(); ++seg) {
        double a = brk[seg], b = brk[seg + 1];
        if (b - a < 1e-14) continue;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double seg_sum = 0.0;
        for (int i = 0; i < opt.slice_order; ++i) {
            double xi = mid + half * q.nodes[i];
            double ylo = -opt.cap + c2[1], yhi = opt.cap + c2[1];
            bool empty = false;
            for (const auto& h : hp) {
                double rem = h[2] - h[0] * xi;
                if (std::fabs(h[1]) < 1e-13) {
                    if (rem < 0.0) empty = true;
                } else if (h[1] > 0.0) {
                    yhi = std::min(yhi, rem / h[1]);
                } else {
                    ylo = std::max(ylo, rem / h[1]);
                }
                if (empty || ylo >= yhi) {
                    empty = true;
                    break;
                }
            }
            if (empty) continue;
            Vec w0 = base_w;
            w0[ax0] = xi;
            double inner;
            if (phi.kind() == TestFunction::Kind::gaussian_bump) {
                Vec y0 = x;
                axpy(y0, t, w0);
                double k = phi.constant_value();
                for (std::size_t d = 0; d < y0.size(); ++d) {
                    if (static_cast<int>(d) == ax1) continue;
                    double z = y0[d] - phi.bump_center()[d];
                    k *= std::exp(-z * z / (2.0 * phi.bump_width() * phi.bump_width()));
                }
                double dprime = (phi.bump_center()[ax1] - x[ax1]) / t;
                inner = k * merged_gaussian_integral(ylo, yhi, c2[1], bump_a2, dprime);
            } else {
                AxisPoly p = phi_on_axis(phi, x, t, w0, ax1);
                inner = axis_integral(p, ylo, yhi, c2[1]);
            }
            seg_sum += q.weights[i] * std::exp(-0.25 * (xi - c2[0]) * (xi - c2[0])) * inner;
        }
        total += seg_sum * half;
    }
    return total;
}

inline double gauss_over_domain(const ScaledDomain& D, const Vec& center, const TestFunction& phi,
                                const TubeOptions& opt) {
    if (D.is_box) return gauss_over_box(D, center, phi);
    if (D.n == 2) {
        std::vector<std::array<double, 3>> hp;
        for (const auto& h : D.hs) hp.push_back({h.normal[0], h.normal[1], h.offset});
        std::vector<double> vx;
        for (const Vec& v : D.verts) vx.push_back(v[0]);
        return gauss_over_polygon_2d(hp, vx, D.x, D.t, {center[0], center[1]}, zeros(2), 0, 1,
                                     phi, opt);
    }
    if (D.n == 3) {
        // slabs along w_3; cross-sections are convex polygons
        double zlo = center[2] - opt.cap, zhi = center[2] + opt.cap;
        std::vector<double> brk{zlo, zhi};
        for (const Vec& v : D.verts)
            if (v[2] > zlo && v[2] < zhi) brk.push_back(v[2]);
        std::sort(brk.begin(), brk.end());
        const QuadRule& q = gauss_legendre(opt.slice_order);
        double total = 0.0;
        for (std::size_t seg = 0; seg + 1 < brk.size(); ++seg) {
            double a = brk[seg], b = brk[seg + 1];
            if (b - a < 1e-14) continue;
            double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double seg_sum = 0.0;
            for (int i = 0; i < opt.slice_order; ++i) {
                double z = mid + half * q.nodes[i];
                std::vector<std::array<double, 3>> hp;
                bool empty = false;
                for (const auto& h : D.hs) {
                    double a0 = h.normal[0], a1 = h.normal[1];
                    double rem = h.offset - h.normal[2] * z;
                    if (std::fabs(a0) < 1e-13 && std::fabs(a1) < 1e-13) {
                        if (rem < 0.0) {
                            empty = true;
                            break;
                        }
                    } else {
                        hp.push_back({a0, a1, rem});
                    }
                }
                if (empty) continue;
                // slice polygon vertex x-coordinates (pairwise line meets)
                std::vector<double> vx;
                for (std::size_t p1 = 0; p1 < hp.size(); ++p1)
                    for (std::size_t p2 = p1 + 1; p2 < hp.size(); ++p2) {
                        double det = hp[p1][0] * hp[p2][1] - hp[p2][0] * hp[p1][1];
                        if (std::fabs(det) < 1e-13) continue;
                        double px = (hp[p1][2] * hp[p2][1] - hp[p2][2] * hp[p1][1]) / det;
                        double py = (hp[p1][0] * hp[p2][2] - hp[p2][0] * hp[p1][2]) / det;
                        bool ok = true;
                        for (const auto& h : hp)
                            if (h[0] * px + h[1] * py > h[2] + 1e-9) {
                                ok = false;
                                break;
                            }
                        if (ok) vx.push_back(px);
                    }
                Vec base_w = zeros(3);
                base_w[2] = z;
                double sect = gauss_over_polygon_2d(hp, vx, D.x, D.t, {center[0], center[1]},
                                                    base_w, 0, 1, phi, opt);
                seg_sum += q.weights[i] * std::exp(-0.25 * (z - center[2]) * (z - center[2])) * sect;
            }
            total += seg_sum * half;
        }
        return total;
    }
    throw UnsupportedOperation("tube w-integral: general polytopes supported for n <= 3");
}

}  // namespace tubedetail

// Stratified tube representation of the heat content restricted to [E]_r:
// outer sum over face strata, quadrature in the normal scale beta, the
// normal-cone sphere patch and the face, with the body integral in rescaled
// coordinates evaluated in closed form (boxes) or by slicing.
inline HeatSample heat_content_tube(const Shape& shape, const TestFunction& phi, double t,
                                    double r, TubeOptions opt = {}) {
    if (!(t > 0.0)) throw ValidationError("heat content: t must be positive");
    if (!(r > 0.0)) throw ValidationError("tube: truncation radius must be positive");
    if (!(r < shape.reach())) throw ValidationError("tube: r must be below the reach");

    const ConvexPolytope* poly = nullptr;
    ConvexPolytope from_polygon;
    if (shape.kind() == Shape::Kind::polytope) {
        poly = &shape.as_polytope();
    } else if (shape.kind() == Shape::Kind::polygon && shape.as_polygon().convex) {
        from_polygon = ConvexPolytope::from_vertices(shape.as_polygon().vertices);
        poly = &from_polygon;
    } else {
        throw UnsupportedOperation("tube estimator requires a convex polytope");
    }

    const int n = poly->ambient_dim();
    const double beta_max = std::min(r / t, opt.cap);
    Vec box_lo, box_hi;
    const bool box_path = poly->is_axis_aligned_box(&box_lo, &box_hi);
    const QuadRule& beta_rule = gauss_legendre(opt.beta_order);

    double total = 0.0;
    for (const auto& face : poly->faces()) {
        const int j = face.dim;
        const int k = n - 1 - j;
        if (j > 2) throw UnsupportedOperation("tube estimator supports faces of dimension <= 2");

        std::vector<WeightedNode> x_nodes =
            face_quadrature_nodes(poly->face_points(face), j, opt.face_order);

        std::vector<Vec> act;
        for (int i : face.active) act.push_back(poly->halfspaces()[i].normal);
        std::vector<WeightedNode> nu_nodes;
        if (k == 0) {
            nu_nodes.push_back({act[0], 1.0});
        } else if (k == 1) {
            nu_nodes = arc_quadrature_nodes(act[0], act[1], opt.angle_order);
        } else if (k == 2) {
            nu_nodes = spherical_patch_nodes(act, opt.angle_order);
        } else {
            throw UnsupportedOperation("tube estimator supports ambient dimension <= 3");
        }

        double face_acc = 0.0;
        for (const auto& xn : x_nodes) {
            tubedetail::ScaledDomain D =
                tubedetail::make_domain(*poly, xn.point, t, box_path, box_lo, box_hi);
            for (const auto& nun : nu_nodes) {
                for (int bi = 0; bi < opt.beta_order; ++bi) {
                    double beta = 0.5 * beta_max * (1.0 + beta_rule.nodes[bi]);
                    double bw = 0.5 * beta_max * beta_rule.weights[bi];
                    Vec c = scaled(nun.point, beta);
                    double g = tubedetail::gauss_over_domain(D, c, phi, opt);
                    face_acc += xn.weight * nun.weight * bw * std::pow(beta, k) * g;
                }
            }
        }
        total += std::pow(t, k + 1) * face_acc;
    }
    total *= std::pow(4.0 * std::numbers::pi, -0.5 * n);
    return {t, total, 0.0, "tube_quad", phi.id()};
}

// ---------------------------------------------------------------------------
// Norm identities and estimator dispatch
// ---------------------------------------------------------------------------

struct HeatEstimatorConfig {
    enum class Method { auto_select, mc, exact, tube };
    Method method = Method::auto_select;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    int threads = 0;
    double truncation = 0.0;  // 0: choose automatically
    double quad_tol = 1e-10;
};

// Exact oracle for phi == const when one exists (boxes, unions of boxes with
// the cross-talk bound folded into stderr, balls).
inline std::optional<HeatSample> heat_content_exact_oracle(const Shape& shape,
                                                           const TestFunction& phi, double t,
                                                           double quad_tol = 1e-10) {
    if (phi.kind() != TestFunction::Kind::constant) return std::nullopt;
    const double c = phi.constant_value();
    auto scale_sample = [&](HeatSample h) {
        h.estimate *= c;
        h.stderr_value *= std::fabs(c);
        h.phi_id = phi.id();
        return h;
    };
    if (shape.kind() == Shape::Kind::polytope && shape.as_polytope().is_axis_aligned_box())
        return scale_sample(heat_content_box_exact(shape, t));
    if (shape.kind() == Shape::Kind::ball)
        return scale_sample(heat_content_ball_quad(shape, t, quad_tol));
    if (shape.kind() == Shape::Kind::disjoint_union) {
        double sum = 0.0, err = 0.0;
        bool any_ball = false;
        const int n = shape.ambient_dim();
        for (const Shape& p : shape.as_union().parts) {
            if (p.kind() == Shape::Kind::polytope && p.as_polytope().is_axis_aligned_box()) {
                sum += heat_content_box_exact(p, t).estimate;
            } else if (p.kind() == Shape::Kind::ball) {
                sum += heat_content_ball_quad(p, t, quad_tol).estimate;
                any_ball = true;
            } else {
                return std::nullopt;
            }
            // cross-part heat leakage bound, budgeted as uncertainty
            double sep = shape.as_union().min_separation;
            err += std::pow(2.0, 0.5 * n) * p.volume() * std::exp(-sep * sep / (8.0 * t * t));
        }
        return HeatSample{t, c * sum, std::fabs(c) * err, any_ball ? "ball_quad" : "box_exact",
                          phi.id()};
    }
    return std::nullopt;
}

inline HeatSample heat_content(const Shape& shape, const TestFunction& phi, double t,
                               const HeatEstimatorConfig& cfg) {
    using M = HeatEstimatorConfig::Method;
    switch (cfg.method) {
        case M::mc:
            return heat_content_mc(shape, phi, t, cfg.samples, cfg.seed, cfg.threads);
        case M::exact: {
            auto h = heat_content_exact_oracle(shape, phi, t, cfg.quad_tol);
            if (!h) throw UnsupportedOperation("no exact oracle for this shape/phi combination");
            return *h;
        }
        case M::tube: {
            double r = cfg.truncation > 0.0 ? cfg.truncation
                                            : default_truncation_radius(shape, phi, t);
            return heat_content_tube(shape, phi, t, r);
        }
        case M::auto_select: {
            if (auto h = heat_content_exact_oracle(shape, phi, t, cfg.quad_tol)) return *h;
            bool tube_ok = shape.kind() == Shape::Kind::polytope ||
                           (shape.kind() == Shape::Kind::polygon && shape.as_polygon().convex);
            if (tube_ok && shape.ambient_dim() <= 3) {
                double r = cfg.truncation > 0.0 ? cfg.truncation
                                                : default_truncation_radius(shape, phi, t);
                return heat_content_tube(shape, phi, t, r);
            }
            return heat_content_mc(shape, phi, t, cfg.samples, cfg.seed, cfg.threads);
        }
    }
    throw NumericalError("unreachable");
}

struct HeatNorms {
    double l2_sq = 0.0;  // squared L^2 norm of T_s 1_E  =  vol(E) - K_{2s}(E, E^c)
    double l1 = 0.0;     // L^1 distance  =  2 K_s(E, E^c)
    std::string method;
};

// Norm identities at semigroup time s: K_s(E, E^c) = f_E(sqrt(s)) for phi==1.
inline HeatNorms heat_norms(const Shape& shape, double semigroup_time, std::uint64_t n_samples,
                            std::uint64_t seed, int threads = 0) {
    if (!(semigroup_time > 0.0)) throw ValidationError("heat norms: time must be positive");
    HeatEstimatorConfig cfg;
    cfg.samples = n_samples;
    cfg.seed = seed;
    cfg.threads = threads;
    TestFunction one = TestFunction::constant(1.0);
    auto K = [&](double s) {
        if (auto h = heat_content_exact_oracle(shape, one, std::sqrt(s))) return *h;
        return heat_content_mc(shape, one, std::sqrt(s), n_samples, seed, threads);
    };
    HeatSample k1 = K(semigroup_time);
    HeatSample k2 = K(2.0 * semigroup_time);
    HeatNorms out;
    out.l1 = 2.0 * k1.estimate;
    out.l2_sq = shape.volume() - k2.estimate;
    out.method = k1.method;
    return out;
}

}  // namespace reachlab
