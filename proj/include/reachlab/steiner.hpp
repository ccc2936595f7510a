#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "reachlab/fit.hpp"
#include "reachlab/rng.hpp"
#include "reachlab/shape.hpp"
#include "reachlab/strata.hpp"

namespace reachlab {

// L^n([E]_r \ E) in closed form; valid for 0 <= r < reach(E).
inline double parallel_volume_exact(const Shape& shape, double r) {
    if (r < 0.0) throw ValidationError("parallel volume: r must be >= 0");
    if (r == 0.0) return 0.0;
    if (!(r < shape.reach()))
        throw ValidationError("parallel volume: Steiner polynomial is invalid for r >= reach");
    const int n = shape.ambient_dim();
    switch (shape.kind()) {
        case Shape::Kind::ball: {
            double R = shape.as_ball().radius;
            return unit_ball_volume(n) * (std::pow(R + r, n) - std::pow(R, n));
        }
        case Shape::Kind::polytope:
            return Shape::steiner_polynomial(shape.as_polytope(), r) - shape.volume();
        case Shape::Kind::rounded_polytope: {
            const auto& rd = shape.as_rounded();
            return Shape::steiner_polynomial(rd.core, rd.rounding + r) -
                   Shape::steiner_polynomial(rd.core, rd.rounding);
        }
        case Shape::Kind::disjoint_union: {
            double v = 0.0;  // r < reach = separation/2, so the inflated parts stay disjoint
            for (const Shape& p : shape.as_union().parts) v += parallel_volume_exact(p, r);
            return v;
        }
        case Shape::Kind::polygon: {
            // reach > 0 only for convex polygons, handled as a polytope
            return Shape::steiner_polynomial(
                       ConvexPolytope::from_vertices(shape.as_polygon().vertices), r) -
                   shape.volume();
        }
    }
    throw NumericalError("unreachable");
}

// Monte-Carlo estimate of L^n{x : 0 < delta_E(x) <= r} by sampling the
// r-inflated bounding box.
inline McEstimate parallel_volume_mc(const Shape& shape, double r, std::uint64_t n_samples,
                                     std::uint64_t seed, int threads = 0) {
    if (r < 0.0) throw ValidationError("parallel volume: r must be >= 0");
    if (r == 0.0) return {0.0, 0.0, n_samples};
    auto [lo, hi] = shape.bounding_box();
    for (std::size_t i = 0; i < lo.size(); ++i) {
        lo[i] -= r;
        hi[i] += r;
    }
    double box_vol = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) box_vol *= hi[i] - lo[i];

    McEstimate est = mc_mean(n_samples, seed, threads, [&, lo = lo, hi = hi](RngStream& rng) {
        Vec x(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
        if (shape.contains(x)) return 0.0;
        return shape.distance(x) <= r ? 1.0 : 0.0;
    });
    est.mean *= box_vol;
    est.stderr_of_mean *= box_vol;
    return est;
}

enum class SteinerSource { exact, mc };

struct SteinerFit {
    std::vector<double> r_grid;
    std::vector<double> volumes;         // annulus volumes per radius
    std::vector<double> volume_stderr;   // 0 for the exact source
    std::vector<double> coefficients;    // c_j, coefficient of r^j, j = 1..n
    std::vector<double> covariance;      // n x n row-major (coefficients)
    std::vector<double> curvature;       // C_k = c_{n-k} / omega_{n-k}, k = 0..n-1
    std::vector<double> curvature_stderr;
    double condition = 0.0;
};

// Chebyshev-spaced default grid: n+3 radii in [0.05, 0.5] * min(1, reach/2).
inline std::vector<double> default_r_grid(const Shape& shape) {
    const int n = shape.ambient_dim();
    const int m = n + 3;
    double cap = std::isinf(shape.reach()) ? 1.0 : std::min(1.0, shape.reach() / 2.0);
    double a = 0.05 * cap, b = 0.5 * cap;
    std::vector<double> grid(m);
    for (int j = 0; j < m; ++j)
        grid[j] = 0.5 * (a + b) +
                  0.5 * (b - a) * std::cos(std::numbers::pi * (2.0 * j + 1.0) / (2.0 * m));
    std::sort(grid.begin(), grid.end());
    return grid;
}

// Least-squares recovery of the curvature measures from parallel-volume data.
// The fitted polynomial sum_j c_j r^j has no constant term; C_k is read off
// as c_{n-k} / omega_{n-k}.  MC-source fits use inverse-variance weights.
inline SteinerFit fit_curvature_measures(const Shape& shape, const std::vector<double>& r_grid,
                                         SteinerSource source, std::uint64_t n_samples = 1'000'000,
                                         std::uint64_t seed = 1, int threads = 0) {
    const int n = shape.ambient_dim();
    if (static_cast<int>(r_grid.size()) < n)
        throw ValidationError("fit_curvature_measures: need at least n distinct radii");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0) || !(r_grid[i] < shape.reach()))
            throw ValidationError("fit_curvature_measures: radii must lie in (0, reach)");
        if (i > 0 && !(r_grid[i] > r_grid[i - 1]))
            throw ValidationError("fit_curvature_measures: radii must be strictly increasing");
    }

    SteinerFit fit;
    fit.r_grid = r_grid;
    for (double r : r_grid) {
        if (source == SteinerSource::exact) {
            fit.volumes.push_back(parallel_volume_exact(shape, r));
            fit.volume_stderr.push_back(0.0);
        } else {
            McEstimate e = parallel_volume_mc(shape, r, n_samples, seed + fit.volumes.size(), threads);
            fit.volumes.push_back(e.mean);
            fit.volume_stderr.push_back(e.stderr_of_mean);
        }
    }

    std::vector<std::vector<double>> X;
    for (double r : r_grid) {
        std::vector<double> row(n);
        for (int j = 1; j <= n; ++j) row[j - 1] = std::pow(r, j);
        X.push_back(std::move(row));
    }
    std::vector<double> sigma;
    if (source == SteinerSource::mc) sigma = fit.volume_stderr;
    WlsResult w = weighted_least_squares(X, fit.volumes, sigma);
    fit.coefficients = w.coeffs;
    fit.covariance = w.covariance;
    fit.condition = w.condition;

    fit.curvature.resize(n);
    fit.curvature_stderr.resize(n);
    for (int k = 0; k <= n - 1; ++k) {
        int j = n - k;  // power of r carrying C_k
        double om = unit_ball_volume(n - k);
        fit.curvature[k] = w.coeffs[j - 1] / om;
        fit.curvature_stderr[k] = w.coeff_stderr[j - 1] / om;
    }
    return fit;
}

}  // namespace reachlab
