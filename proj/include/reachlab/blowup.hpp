#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "reachlab/cone.hpp"
#include "reachlab/rng.hpp"
#include "reachlab/shape.hpp"
#include "reachlab/strata.hpp"

namespace reachlab {

struct WindowedHausdorff {
    double value = 0.0;
    double error_bound = 0.0;  // h * sqrt(n) grid certificate
};

namespace blowdetail {

// Dykstra's alternating projections onto (convex shape) cap (closed ball of
// radius r); geometric convergence for compact convex sets.
inline Vec project_convex_window(const Shape& A, double r, const Vec& x) {
    Vec p = x;
    Vec u = zeros(x.size()), v = zeros(x.size());
    Vec y;
    for (int it = 0; it < 300; ++it) {
        Vec pu = add(p, u);
        double npu = norm(pu);
        y = npu > r ? scaled(pu, r / npu) : pu;
        u = sub(pu, y);
        Vec yv = add(y, v);
        p = A.project(yv);
        v = sub(yv, p);
        if (dist(p, y) < 1e-13) break;
    }
    return p;
}

// n-dimensional exact squared Euclidean distance transform on a grid
// (per-axis lower envelope of parabolas).
inline void edt_sq_axis(std::vector<double>& f) {
    const std::size_t m = f.size();
    std::vector<int> v(m);
    std::vector<double> z(m + 1), d(m);
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (std::size_t q = 1; q < m; ++q) {
        double s;
        for (;;) {
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
            if (s <= z[k] && k > 0)
                --k;
            else
                break;
        }
        ++k;
        v[k] = static_cast<int>(q);
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (std::size_t q = 0; q < m; ++q) {
        while (z[k + 1] < static_cast<double>(q)) ++k;
        double dq = static_cast<double>(q) - v[k];
        d[q] = dq * dq + f[v[k]];
    }
    f = d;
}

// Full n-dimensional squared EDT on an m^n grid stored flat (axis 0 fastest).
// `f` holds 0 on seed cells and a large value elsewhere; on return it holds
// squared grid distances to the nearest seed.
inline void edt_sq_grid(std::vector<double>& f, int m, int n) {
    std::vector<double> line(m);
    for (int d = 0; d < n; ++d) {
        std::size_t step = 1;
        for (int dd = 0; dd < d; ++dd) step *= m;
        const std::size_t repeat = f.size() / m;
        for (std::size_t base = 0; base < repeat; ++base) {
            std::size_t coords[8] = {0};
            std::size_t rem = base;
            for (int dd = 0; dd < n; ++dd) {
                if (dd == d) continue;
                coords[dd] = rem % m;
                rem /= m;
            }
            std::size_t start = 0, mult = 1;
            for (int dd = 0; dd < n; ++dd) {
                if (dd != d) start += coords[dd] * mult;
                mult *= m;
            }
            for (int q = 0; q < m; ++q) line[q] = f[start + q * step];
            edt_sq_axis(line);
            for (int q = 0; q < m; ++q) f[start + q * step] = line[q];
        }
    }
}

}  // namespace blowdetail

// Hausdorff distance between A cap B_r(0) and C cap B_r(0), sampled on an
// h-pitch grid of the window.  Distances to the cone side are exact (radial
// clipping of the cone projection); distances to the shape side are exact for
// convex shapes (Dykstra) and grid-based otherwise.  The returned value is
// within h*sqrt(n) of the true distance.
inline WindowedHausdorff hausdorff_distance_windowed(const Shape& A, const PolyhedralCone& C,
                                                     double r, double h) {
    if (!(r > 0.0) || !(h > 0.0)) throw ValidationError("windowed hausdorff: r, h > 0 required");
    const int n = A.ambient_dim();
    if (C.ambient_dim != n) throw DimensionMismatch("cone/shape dimension mismatch");
    const int m = 2 * static_cast<int>(std::ceil(r / h)) + 1;
    const double lo = -h * ((m - 1) / 2);
    const std::size_t total = static_cast<std::size_t>(std::pow(m, n));

    auto point_of = [&](std::size_t idx) {
        Vec x(n);
        for (int d = 0; d < n; ++d) {
            x[d] = lo + h * (idx % m);
            idx /= m;
        }
        return x;
    };

    std::vector<char> in_a(total, 0), in_c(total, 0);
    std::size_t count_a = 0, count_c = 0;
    const double r2 = r * r;
    for (std::size_t i = 0; i < total; ++i) {
        Vec x = point_of(i);
        if (norm_sq(x) > r2) continue;
        if (A.contains(x)) {
            in_a[i] = 1;
            ++count_a;
        }
        if (C.contains(x)) {
            in_c[i] = 1;
            ++count_c;
        }
    }
    if (count_a == 0 || count_c == 0)
        throw ValidationError("windowed hausdorff: empty intersection with the window");

    // direction 1: sup over A-side grid points of the exact distance to C cap B_r
    double dir1 = 0.0;
    for (std::size_t i = 0; i < total; ++i)
        if (in_a[i]) dir1 = std::max(dir1, cone_window_distance(C, point_of(i), r));

    // direction 2: sup over C-side points of the distance to A cap B_r
    const double big = 1e30;
    std::vector<double> f(total);
    for (std::size_t i = 0; i < total; ++i) f[i] = in_a[i] ? 0.0 : big;
    blowdetail::edt_sq_grid(f, m, n);

    double dir2 = 0.0;
    if (A.is_convex()) {
        // EDT prune, then exact refinement of the candidate band
        double best_grid = 0.0;
        for (std::size_t i = 0; i < total; ++i)
            if (in_c[i]) best_grid = std::max(best_grid, f[i]);
        const double band = h * std::sqrt(best_grid) - 2.0 * h * std::sqrt(static_cast<double>(n));
        for (std::size_t i = 0; i < total; ++i) {
            if (!in_c[i]) continue;
            if (h * std::sqrt(f[i]) < band) continue;
            Vec x = point_of(i);
            Vec p = blowdetail::project_convex_window(A, r, x);
            dir2 = std::max(dir2, dist(x, p));
        }
    } else {
        for (std::size_t i = 0; i < total; ++i)
            if (in_c[i]) dir2 = std::max(dir2, h * std::sqrt(f[i]));
    }

    return {std::max(dir1, dir2), h * std::sqrt(static_cast<double>(n))};
}

// Monte-Carlo estimate of L^n((A symdiff C) cap B_r).
inline McEstimate symdiff_measure_mc(const Shape& A, const PolyhedralCone& C, double r,
                                     std::uint64_t n_samples, std::uint64_t seed,
                                     int threads = 0) {
    const int n = A.ambient_dim();
    if (C.ambient_dim != n) throw DimensionMismatch("cone/shape dimension mismatch");
    const double ball_vol = unit_ball_volume(n) * std::pow(r, n);
    McEstimate est = mc_mean(n_samples, seed, threads, [&](RngStream& rng) {
        Vec x(n);
        for (std::uint64_t attempts = 1;; ++attempts) {
            double s2 = 0.0;
            for (int i = 0; i < n; ++i) {
                x[i] = rng.uniform(-r, r);
                s2 += x[i] * x[i];
            }
            if (s2 <= r * r) break;
            if (attempts > 4'000'000) throw RejectionStall("ball sampling stalled");
        }
        return A.contains(x) != C.contains(x) ? 1.0 : 0.0;
    });
    est.mean *= ball_vol;
    est.stderr_of_mean *= ball_vol;
    return est;
}

struct ConvergenceTable {
    Vec x0;
    double window = 1.0;
    double shape_reach = 0.0;
    std::vector<double> rho;
    std::vector<double> hausdorff;
    std::vector<double> hausdorff_err;
    std::vector<double> symdiff;
    std::vector<double> symdiff_stderr;
};

// Blow-up diagnostics at a boundary point: for each scale rho, the windowed
// Hausdorff distance and the symmetric-difference measure between the
// rescaled set and its tangent cone.
inline ConvergenceTable convergence_table(const Shape& shape, const Vec& x0,
                                          const std::vector<double>& rho_grid, double window,
                                          std::uint64_t n_samples, std::uint64_t seed,
                                          double pitch = 0.0, int threads = 0) {
    if (!shape.on_boundary(x0, 1e-9))
        throw ValidationError("convergence_table: x0 must lie on the boundary");
    for (std::size_t i = 1; i < rho_grid.size(); ++i)
        if (!(rho_grid[i] < rho_grid[i - 1]))
            throw ValidationError("convergence_table: rho grid must be strictly decreasing");

    PolyhedralCone tan = tangent_cone(shape, x0);
    ConvergenceTable table;
    table.x0 = x0;
    table.window = window;
    table.shape_reach = shape.reach();
    const double h = pitch > 0.0 ? pitch : window / 512.0;
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        double rho = rho_grid[i];
        Shape rescaled = shape.rescaled(x0, rho);
        WindowedHausdorff wh = hausdorff_distance_windowed(rescaled, tan, window, h);
        McEstimate sd = symdiff_measure_mc(rescaled, tan, window, n_samples, seed + i, threads);
        table.rho.push_back(rho);
        table.hausdorff.push_back(wh.value);
        table.hausdorff_err.push_back(wh.error_bound);
        table.symdiff.push_back(sd.mean);
        table.symdiff_stderr.push_back(sd.stderr_of_mean);
    }
    return table;
}

}  // namespace reachlab
