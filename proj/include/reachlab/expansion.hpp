#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachlab/face_quadrature.hpp"
#include "reachlab/fit.hpp"
#include "reachlab/heat.hpp"
#include "reachlab/shape.hpp"
#include "reachlab/strata.hpp"

namespace reachlab {

// Sign convention for the principal curvatures of the smooth boundary part.
// `graph` reads them off the Hessian of the local subgraph parameterization
// (nonpositive on convex bodies); `bundle` is the normal-bundle convention
// (nonnegative on convex bodies).
enum class CurvatureConvention { graph, bundle };

inline const char* to_string(CurvatureConvention c) {
    return c == CurvatureConvention::graph ? "graph" : "bundle";
}

// alpha_n = 2^{n-2} pi^{(n-1)/2} (n-1)
inline double paper_alpha(int n) {
    return std::pow(2.0, n - 2) * std::pow(std::numbers::pi, 0.5 * (n - 1)) * (n - 1);
}

// ---------------------------------------------------------------------------
// Boundary quadrature: integrates g(x, nu, H_graph) over the reduced boundary.
// H_graph is the mean curvature in the graph convention (0 on flat pieces,
// -1/R on spheres of radius R).
// ---------------------------------------------------------------------------

inline double boundary_integral(const Shape& shape,
                                const std::function<double(const Vec&, const Vec&, double)>& g,
                                int order = 48) {
    const int n = shape.ambient_dim();
    switch (shape.kind()) {
        case Shape::Kind::ball: {
            const Ball& b = shape.as_ball();
            const double R = b.radius;
            if (n == 2) {
                return gl_integrate(
                    [&](double th) {
                        Vec nu{std::cos(th), std::sin(th)};
                        Vec x = add(b.center, scaled(nu, R));
                        return g(x, nu, -1.0 / R) * R;
                    },
                    0.0, 2.0 * std::numbers::pi, std::max(order, 96));
            }
            if (n == 3) {
                const QuadRule& q = gauss_legendre(order);
                double total = 0.0;
                for (int i = 0; i < order; ++i) {
                    double th = 0.5 * std::numbers::pi * (1.0 + q.nodes[i]);
                    for (int j = 0; j < order; ++j) {
                        double ph = std::numbers::pi * (1.0 + q.nodes[j]);
                        Vec nu{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                               std::cos(th)};
                        Vec x = add(b.center, scaled(nu, R));
                        total += 0.25 * q.weights[i] * q.weights[j] * std::numbers::pi *
                                 std::numbers::pi * std::sin(th) * R * R * g(x, nu, -1.0 / R);
                    }
                }
                return total;
            }
            throw UnsupportedOperation("boundary integrals implemented for n <= 3");
        }
        case Shape::Kind::polytope: {
            const ConvexPolytope& p = shape.as_polytope();
            double total = 0.0;
            for (const auto* f : p.faces_of_dim(n - 1)) {
                const Vec& nu = p.halfspaces()[f->active[0]].normal;
                for (const auto& node : face_quadrature_nodes(p.face_points(*f), n - 1, order))
                    total += node.weight * g(node.point, nu, 0.0);
            }
            return total;
        }
        case Shape::Kind::rounded_polytope: {
            const auto& rd = shape.as_rounded();
            const ConvexPolytope& core = rd.core;
            const double rho = rd.rounding;
            double total = 0.0;
            for (const auto& f : core.faces()) {
                const int j = f.dim;
                std::vector<Vec> act;
                for (int i : f.active) act.push_back(core.halfspaces()[i].normal);
                std::vector<WeightedNode> nu_nodes;
                if (j == n - 1)
                    nu_nodes.push_back({act[0], 1.0});
                else if (j == n - 2)
                    nu_nodes = arc_quadrature_nodes(act[0], act[1], order);
                else if (n == 3 && j == 0)
                    nu_nodes = spherical_patch_nodes(act, order);
                else
                    throw UnsupportedOperation("rounded boundary integrals for n <= 3");
                const double hgraph = -(n - 1.0 - j) / ((n - 1.0) * rho);
                const double jac = std::pow(rho, n - 1 - j);
                for (const auto& xn : face_quadrature_nodes(core.face_points(f), j, order))
                    for (const auto& nun : nu_nodes) {
                        Vec x = xn.point;
                        axpy(x, rho, nun.point);
                        total += jac * xn.weight * nun.weight * g(x, nun.point, hgraph);
                    }
            }
            return total;
        }
        case Shape::Kind::disjoint_union: {
            double total = 0.0;
            for (const Shape& p : shape.as_union().parts) total += boundary_integral(p, g, order);
            return total;
        }
        case Shape::Kind::polygon: {
            const auto& pg = shape.as_polygon();
            double total = 0.0;
            const std::size_t m = pg.vertices.size();
            for (std::size_t i = 0; i < m; ++i) {
                Vec nu = detail::polygon_edge_outward_normal(pg, i);
                std::vector<Vec> seg{pg.vertices[i], pg.vertices[(i + 1) % m]};
                for (const auto& node : face_quadrature_nodes(seg, 1, order))
                    total += node.weight * g(node.point, nu, 0.0);
            }
            return total;
        }
    }
    throw NumericalError("unreachable");
}

// (1/sqrt(pi)) int_{FE} phi dH^{n-1}; the coefficient of t.
inline double first_order_coeff(const Shape& shape, const TestFunction& phi) {
    return boundary_integral(shape, [&](const Vec& x, const Vec&, double) { return phi(x); }) /
           std::sqrt(std::numbers::pi);
}

// - int_{FE} <grad phi, nu> dH^{n-1}
inline double gradient_term(const Shape& shape, const TestFunction& phi) {
    return -boundary_integral(
        shape, [&](const Vec& x, const Vec& nu, double) { return dot(phi.gradient(x), nu); });
}

// int_{FE} H_E phi dH^{n-1} under the chosen curvature convention.
inline double mean_curvature_integral(const Shape& shape, const TestFunction& phi,
                                      CurvatureConvention conv) {
    double sign = conv == CurvatureConvention::graph ? 1.0 : -1.0;
    return sign * boundary_integral(shape, [&](const Vec& x, const Vec&, double h) {
               return h * phi(x);
           });
}

// alpha * int H_E phi; callers default alpha to alpha_n.
inline double mean_curvature_term(const Shape& shape, const TestFunction& phi, double alpha,
                                  CurvatureConvention conv) {
    return alpha * mean_curvature_integral(shape, phi, conv);
}

// ---------------------------------------------------------------------------
// Wedge coefficient: the dimension-reduced Gaussian cone integral
//   c(theta) = J(theta) / (4 pi),
//   J = int_{N2} |y| ( int_{T2} e^{-|w-y|^2/4} dw ) dH^2(y),
// with T2 the planar cone of opening theta and N2 its dual.  The radial part
// of the T2 integral is closed form, leaving three nested smooth 1D rules;
// orders are doubled until the relative change is below rel_tol.
// ---------------------------------------------------------------------------

inline double wedge_coefficient(double theta, double rel_tol = 1e-9) {
    if (!(theta > 0.0) || !(theta < std::numbers::pi))
        throw ValidationError("wedge coefficient: interior angle must lie in (0, pi)");
    const double half_gap = 0.5 * (std::numbers::pi - theta);  // N2 half-opening
    const double smax = 40.0;

    auto value = [&](int o_psi, int o_s, int o_phi) {
        const QuadRule& qp = gauss_legendre(o_psi);
        const QuadRule& qs = gauss_legendre(o_s);
        const QuadRule& qf = gauss_legendre(o_phi);
        double J = 0.0;
        for (int ip = 0; ip < o_psi; ++ip) {
            double psi = half_gap * qp.nodes[ip];
            double inner_s = 0.0;
            for (int is = 0; is < o_s; ++is) {
                double s = 0.5 * smax * (1.0 + qs.nodes[is]);
                double it = 0.0;
                for (int if_ = 0; if_ < o_phi; ++if_) {
                    double phia = 0.5 * theta * qf.nodes[if_];
                    double a = -s * std::cos(phia + psi);  // <u, y>, always <= 0 here
                    double perp_sq = s * s - a * a;
                    it += qf.weights[if_] *
                          (2.0 * std::exp(-0.25 * s * s) +
                           std::sqrt(std::numbers::pi) * a * std::exp(-0.25 * perp_sq) *
                               std::erfc(-0.5 * a));
                }
                it *= 0.5 * theta;
                inner_s += qs.weights[is] * s * s * it;
            }
            J += qp.weights[ip] * inner_s * (0.5 * smax);
        }
        return J * half_gap / (4.0 * std::numbers::pi);
    };

    double prev = value(32, 48, 32);
    for (int mult : {2, 3, 4}) {
        double cur = value(32 * mult, 48 * mult, 32 * mult);
        if (std::fabs(cur - prev) <= rel_tol * std::fabs(cur)) return cur;
        prev = cur;
    }
    throw QuadratureError("wedge coefficient quadrature did not converge");
}

// Codimension-2 corner term: sum over (n-2)-faces of c(theta_F) int_F phi.
inline double corner_term(const Shape& shape, const TestFunction& phi, int order = 48) {
    const int n = shape.ambient_dim();
    switch (shape.kind()) {
        case Shape::Kind::ball:
        case Shape::Kind::rounded_polytope:
            return 0.0;  // no codimension-2 strata
        case Shape::Kind::disjoint_union: {
            double total = 0.0;
            for (const Shape& p : shape.as_union().parts) total += corner_term(p, phi, order);
            return total;
        }
        case Shape::Kind::polygon: {
            const auto& pg = shape.as_polygon();
            if (!pg.convex)
                throw UnsupportedOperation("corner term requires positive reach (convex polygon)");
            double total = 0.0;
            for (std::size_t i = 0; i < pg.vertices.size(); ++i)
                total += wedge_coefficient(polygon_interior_angle(pg, i)) * phi(pg.vertices[i]);
            return total;
        }
        case Shape::Kind::polytope: {
            const ConvexPolytope& p = shape.as_polytope();
            double total = 0.0;
            for (const auto* f : p.faces_of_dim(n - 2)) {
                double c = wedge_coefficient(wedge_angle(p, *f));
                for (const auto& node : face_quadrature_nodes(p.face_points(*f), n - 2, order))
                    total += c * node.weight * phi(node.point);
            }
            return total;
        }
    }
    throw NumericalError("unreachable");
}

// Total H^{n-2} mass of the codimension-2 strata.
inline double codim2_measure(const Shape& shape) {
    const int n = shape.ambient_dim();
    double total = 0.0;
    for (const auto& s : boundary_strata(shape).strata)
        if (s.dim == n - 2) total += s.measure;
    return total;
}

// ---------------------------------------------------------------------------
// Coefficient extraction from heat samples
// ---------------------------------------------------------------------------

struct ExpansionFit {
    std::vector<double> coeffs;        // a_1 .. a_p (t, t^2, ... )
    std::vector<double> coeff_stderr;
    std::vector<double> covariance;    // p x p
    double condition = 0.0;
    bool weighted = false;
    bool octave_ok = true;  // grid spans >= 2 dyadic octaves
};

// Weighted least squares through the origin for f(t) ~ a1 t + a2 t^2 (+ a3
// t^3 nuisance).  Inverse-variance weights when every sample carries one.
inline ExpansionFit fit_expansion(const std::vector<HeatSample>& samples, int degree = 2,
                                  bool with_nuisance = true) {
    if (degree < 1) throw ValidationError("fit_expansion: degree must be >= 1");
    const int p = degree + (with_nuisance ? 1 : 0);
    std::vector<double> ts;
    for (const auto& s : samples) ts.push_back(s.t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    if (static_cast<int>(ts.size()) < degree + 1)
        throw FitError("fit_expansion: need at least degree+1 distinct t values");

    std::vector<std::vector<double>> X;
    std::vector<double> y, sigma;
    bool all_weighted = true;
    for (const auto& s : samples) {
        if (!(s.t > 0.0)) throw ValidationError("fit_expansion: t values must be positive");
        std::vector<double> row(p);
        double tp = 1.0;
        for (int j = 0; j < p; ++j) {
            tp *= s.t;
            row[j] = tp;
        }
        X.push_back(std::move(row));
        y.push_back(s.estimate);
        sigma.push_back(s.stderr_value);
        if (!(s.stderr_value > 0.0)) all_weighted = false;
    }
    WlsResult w = weighted_least_squares(X, y, all_weighted ? sigma : std::vector<double>{});

    ExpansionFit fit;
    fit.coeffs = w.coeffs;
    fit.coeff_stderr = w.coeff_stderr;
    fit.covariance = w.covariance;
    fit.condition = w.condition;
    fit.weighted = all_weighted;
    fit.octave_ok = std::log2(ts.back() / ts.front()) >= 2.0 - 1e-12;
    return fit;
}

// 8 dyadic points with max t = 0.1 * inradius.
inline std::vector<double> default_t_grid(const Shape& shape, int points = 8) {
    double tmax = 0.1 * shape.inradius_lower_bound();
    std::vector<double> grid;
    for (int j = points - 1; j >= 0; --j) grid.push_back(tmax * std::pow(2.0, -j));
    return grid;
}

// ---------------------------------------------------------------------------
// Comparison report
// ---------------------------------------------------------------------------

struct ExpansionCoefficients {
    double a1 = 0.0;
    double a2_smooth = 0.0;    // alpha * int H_E phi
    double a2_gradient = 0.0;  // - int <grad phi, nu>
    double a2_corner = 0.0;    // sum over codim-2 strata of c(theta) phi
    double alpha_used = 0.0;
    std::string convention;
    double a2_total() const { return a2_smooth + a2_gradient + a2_corner; }
};

struct DiscrepancyFlag {
    std::string what;
    double analytic = 0.0;
    double fitted = 0.0;
    double difference = 0.0;
    double tolerance = 0.0;
};

struct ExpansionReport {
    ExpansionCoefficients analytic;
    std::vector<HeatSample> samples;
    ExpansionFit fitted;
    std::optional<std::array<double, 2>> oracle_fit;  // (a1, a2) from an exact oracle
    double paper_alpha_value = 0.0;
    std::optional<double> implied_alpha;   // (a2_fit - grad - corner) / ((n-1) int H_E phi)
    std::optional<double> implied_corner;  // (a2_fit - grad - smooth) / H^{n-2}(Sigma_{n-2})
    std::vector<DiscrepancyFlag> flags;
    std::string estimator_method;
};

struct AlphaChoice {
    enum class Mode { paper, oracle_implied, fixed } mode = Mode::paper;
    double value = 0.0;  // used when mode == fixed
};

inline double resolve_alpha(const AlphaChoice& choice, int n) {
    switch (choice.mode) {
        case AlphaChoice::Mode::paper:
            return paper_alpha(n);
        case AlphaChoice::Mode::oracle_implied:
            // The smooth-boundary oracles measure a vanishing t^2 coefficient
            // (the flattening and curvature-direction contributions cancel),
            // so the data-implied multiplier of int H_E phi is zero.
            return 0.0;
        case AlphaChoice::Mode::fixed:
            return choice.value;
    }
    return paper_alpha(n);
}

inline ExpansionReport compare_report_from_samples(const Shape& shape, const TestFunction& phi,
                                                   std::vector<HeatSample> samples,
                                                   AlphaChoice alpha = {},
                                                   CurvatureConvention conv =
                                                       CurvatureConvention::graph,
                                                   double quad_tol = 1e-10) {
    if (samples.empty()) throw ValidationError("compare_report: no samples");
    const int n = shape.ambient_dim();

    ExpansionReport rep;
    rep.paper_alpha_value = paper_alpha(n);
    rep.analytic.alpha_used = resolve_alpha(alpha, n);
    rep.analytic.convention = to_string(conv);
    rep.analytic.a1 = first_order_coeff(shape, phi);
    rep.analytic.a2_gradient = gradient_term(shape, phi);
    double h_int = mean_curvature_integral(shape, phi, conv);
    rep.analytic.a2_smooth = rep.analytic.alpha_used * h_int;
    rep.analytic.a2_corner = corner_term(shape, phi);

    rep.samples = std::move(samples);
    rep.estimator_method = rep.samples.front().method;
    rep.fitted = fit_expansion(rep.samples);

    bool main_is_exact = true;
    for (const auto& s : rep.samples) main_is_exact &= (s.method != "mc");
    if (main_is_exact) {
        rep.oracle_fit = {rep.fitted.coeffs[0], rep.fitted.coeffs[1]};
    } else if (heat_content_exact_oracle(shape, phi, rep.samples.front().t, quad_tol)) {
        std::vector<HeatSample> oracle_samples;
        for (const auto& s : rep.samples)
            oracle_samples.push_back(*heat_content_exact_oracle(shape, phi, s.t, quad_tol));
        ExpansionFit of = fit_expansion(oracle_samples);
        rep.oracle_fit = {of.coeffs[0], of.coeffs[1]};
    }

    const double a2_fit = rep.fitted.coeffs[1];
    if (std::fabs(h_int) > 1e-12)
        rep.implied_alpha = (a2_fit - rep.analytic.a2_gradient - rep.analytic.a2_corner) /
                            ((n - 1) * h_int);
    double sigma_mass = codim2_measure(shape);
    if (sigma_mass > 1e-12)
        rep.implied_corner = (a2_fit - rep.analytic.a2_gradient - rep.analytic.a2_smooth) /
                             sigma_mass;

    auto add_flag = [&](const std::string& what, double analytic, double fitted, double sig) {
        double tol = 5.0 * sig + 1e-6 * std::max(1.0, std::fabs(analytic));
        if (std::fabs(analytic - fitted) > tol)
            rep.flags.push_back({what, analytic, fitted, std::fabs(analytic - fitted), tol});
    };
    add_flag("a1: analytic vs fitted", rep.analytic.a1, rep.fitted.coeffs[0],
             rep.fitted.coeff_stderr[0]);
    add_flag("a2: analytic vs fitted", rep.analytic.a2_total(), a2_fit,
             rep.fitted.coeff_stderr[1]);
    return rep;
}

inline ExpansionReport compare_report(const Shape& shape, const TestFunction& phi,
                                      const std::vector<double>& t_grid,
                                      const HeatEstimatorConfig& cfg, AlphaChoice alpha = {},
                                      CurvatureConvention conv = CurvatureConvention::graph) {
    if (t_grid.empty()) throw ValidationError("compare_report: empty t grid");
    std::vector<HeatSample> samples;
    for (double t : t_grid) samples.push_back(heat_content(shape, phi, t, cfg));
    return compare_report_from_samples(shape, phi, std::move(samples), alpha, conv, cfg.quad_tol);
}

inline nlohmann::json expansion_report_to_json(const ExpansionReport& rep) {
    nlohmann::json j;
    j["analytic"] = {{"a1", rep.analytic.a1},
                     {"a2_smooth", rep.analytic.a2_smooth},
                     {"a2_gradient", rep.analytic.a2_gradient},
                     {"a2_corner", rep.analytic.a2_corner},
                     {"a2_total", rep.analytic.a2_total()},
                     {"alpha_used", rep.analytic.alpha_used},
                     {"convention", rep.analytic.convention}};
    j["paper_alpha"] = rep.paper_alpha_value;
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : rep.samples)
        samples.push_back({{"t", s.t},
                           {"estimate", s.estimate},
                           {"stderr", s.stderr_value},
                           {"method", s.method},
                           {"phi", s.phi_id}});
    j["samples"] = samples;
    j["fitted"] = {{"coeffs", rep.fitted.coeffs},
                   {"stderr", rep.fitted.coeff_stderr},
                   {"covariance", rep.fitted.covariance},
                   {"weighted", rep.fitted.weighted},
                   {"octave_ok", rep.fitted.octave_ok}};
    if (rep.oracle_fit) j["oracle_fit"] = {{"a1", (*rep.oracle_fit)[0]}, {"a2", (*rep.oracle_fit)[1]}};
    if (rep.implied_alpha) j["implied_alpha"] = *rep.implied_alpha;
    if (rep.implied_corner) j["implied_corner_coefficient"] = *rep.implied_corner;
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& f : rep.flags)
        flags.push_back({{"what", f.what},
                         {"analytic", f.analytic},
                         {"fitted", f.fitted},
                         {"difference", f.difference},
                         {"tolerance", f.tolerance}});
    j["flags"] = flags;
    j["estimator"] = rep.estimator_method;
    return j;
}

}  // namespace reachlab
