#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "reachlab/common.hpp"

namespace reachlab {

struct QuadRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_k.  Cached per order.
inline const QuadRule& gauss_legendre(int k) {
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;

    QuadRule rule;
    rule.nodes.resize(k);
    rule.weights.resize(k);
    for (int i = 0; i < k; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= k; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = k * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(k, std::move(rule)).first->second;
}

template <class F>
double gl_integrate(F&& f, double a, double b, int order) {
    if (a == b) return 0.0;
    const QuadRule& r = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
    return s * half;
}

// Adaptive integration: bisect until a GL(25) panel agrees with its GL(12)
// estimate.  Throws QuadratureError when the budget runs out.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-11,
                          double abs_tol = 1e-300, int max_depth = 48) {
    struct Panel {
        double a, b, coarse;
        int depth;
    };
    double coarse0 = gl_integrate(f, a, b, 12);
    std::vector<Panel> stack{{a, b, coarse0, 0}};
    double total = 0.0;
    long budget = 200000;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        if (--budget < 0) throw QuadratureError("integrate_adaptive: panel budget exhausted");
        double fine = gl_integrate(f, p.a, p.b, 25);
        double err = std::fabs(fine - p.coarse);
        if (err <= abs_tol + rel_tol * std::fabs(fine) || p.depth >= max_depth) {
            if (p.depth >= max_depth && err > 1e3 * (abs_tol + rel_tol * std::fabs(fine)))
                throw QuadratureError("integrate_adaptive: no convergence at max depth");
            total += fine;
            continue;
        }
        double m = 0.5 * (p.a + p.b);
        stack.push_back({p.a, m, gl_integrate(f, p.a, m, 12), p.depth + 1});
        stack.push_back({m, p.b, gl_integrate(f, m, p.b, 12), p.depth + 1});
    }
    return total;
}

// ---------------------------------------------------------------------------
// Closed-form Gaussian segment moments:
//   M_m(a,b; mu, alpha) = \int_a^b (w-mu)^m e^{-alpha (w-mu)^2} dw,  m = 0..3
// The heat-kernel weight uses alpha = 1/4; merged Gaussian factors (test
// functions of bump type) need general alpha > 0.
// ---------------------------------------------------------------------------

inline double gaussian_moment(int m, double a, double b, double mu, double alpha = 0.25) {
    const double sa = std::sqrt(alpha);
    const double za = a - mu, zb = b - mu;
    const double ea = std::exp(-alpha * za * za), eb = std::exp(-alpha * zb * zb);
    switch (m) {
        case 0:
            return 0.5 * std::sqrt(std::numbers::pi / alpha) * (std::erf(sa * zb) - std::erf(sa * za));
        case 1:
            return (ea - eb) / (2.0 * alpha);
        case 2:
            return (za * ea - zb * eb) / (2.0 * alpha) + gaussian_moment(0, a, b, mu, alpha) / (2.0 * alpha);
        case 3: {
            auto anti = [&](double z, double e) { return -(z * z / (2.0 * alpha) + 1.0 / (2.0 * alpha * alpha)) * e; };
            return anti(zb, eb) - anti(za, ea);
        }
        default:
            throw ValidationError("gaussian_moment: order must be 0..3");
    }
}

}  // namespace reachlab
