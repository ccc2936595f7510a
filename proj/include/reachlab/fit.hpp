#pragma once

#include <cmath>
#include <vector>

#include "reachlab/common.hpp"

namespace reachlab {

struct WlsResult {
    std::vector<double> coeffs;
    std::vector<double> covariance;  // p x p row-major
    std::vector<double> coeff_stderr;
    double condition = 0.0;          // 2-norm condition estimate of the design matrix
    double rss = 0.0;
    bool weighted = false;
};

namespace detail {

// 2-norm condition number of a (row-weighted) design matrix by one-sided
// Jacobi orthogonalization of the columns; avoids the precision loss of
// forming the normal matrix.
inline double design_condition(const std::vector<std::vector<double>>& X,
                               const std::vector<double>& row_scale) {
    const std::size_t m = X.size(), p = X[0].size();
    std::vector<Vec> col(p, Vec(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j) col[j][i] = X[i][j] * row_scale[i];
    for (int sweep = 0; sweep < 30; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) {
                double a = dot(col[i], col[i]);
                double b = dot(col[j], col[j]);
                double c = dot(col[i], col[j]);
                if (std::fabs(c) <= 1e-18 * std::sqrt(a * b)) continue;
                rotated = true;
                double theta = 0.5 * std::atan2(2.0 * c, a - b);
                double cs = std::cos(theta), sn = std::sin(theta);
                for (std::size_t r = 0; r < m; ++r) {
                    double vi = col[i][r], vj = col[j][r];
                    col[i][r] = cs * vi + sn * vj;
                    col[j][r] = -sn * vi + cs * vj;
                }
            }
        if (!rotated) break;
    }
    double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double s = norm(col[j]);
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

}  // namespace detail

// Weighted linear least squares y ~ X beta.  `sigma` carries per-row standard
// deviations (inverse-variance weights); pass an empty vector for an
// unweighted fit, in which case the covariance is scaled by the residual
// variance.  Throws FitError on singular or severely ill-conditioned designs.
inline WlsResult weighted_least_squares(const std::vector<std::vector<double>>& X,
                                        const std::vector<double>& y,
                                        const std::vector<double>& sigma,
                                        double max_condition = 1e12) {
    const std::size_t m = X.size();
    if (m == 0 || y.size() != m) throw FitError("least squares: empty or mismatched data");
    const std::size_t p = X[0].size();
    if (m < p) throw FitError("least squares: more parameters than observations");

    WlsResult res;
    res.weighted = !sigma.empty();
    std::vector<double> w(m, 1.0);
    if (res.weighted) {
        for (std::size_t i = 0; i < m; ++i) {
            if (!(sigma[i] > 0.0)) throw FitError("least squares: nonpositive sigma");
            w[i] = 1.0 / (sigma[i] * sigma[i]);
        }
    }

    std::vector<double> G(p * p, 0.0);
    Vec b(p, 0.0);
    std::vector<double> row_scale(m);
    for (std::size_t i = 0; i < m; ++i) {
        row_scale[i] = std::sqrt(w[i]);
        for (std::size_t a = 0; a < p; ++a) {
            b[a] += w[i] * X[i][a] * y[i];
            for (std::size_t c = 0; c < p; ++c) G[a * p + c] += w[i] * X[i][a] * X[i][c];
        }
    }

    res.condition = detail::design_condition(X, row_scale);
    if (!(res.condition < max_condition))
        throw FitError("least squares: ill-conditioned design matrix (cond=" +
                       std::to_string(res.condition) + ")");

    if (!solve_linear(G, b, res.coeffs, 1e-300)) throw FitError("least squares: singular system");

    res.rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double pred = 0.0;
        for (std::size_t a = 0; a < p; ++a) pred += X[i][a] * res.coeffs[a];
        double e = y[i] - pred;
        res.rss += w[i] * e * e;
    }

    res.covariance = invert_spd(G, p);
    if (!res.weighted && m > p) {
        double s2 = res.rss / static_cast<double>(m - p);
        for (double& c : res.covariance) c *= s2;
    }
    res.coeff_stderr.resize(p);
    for (std::size_t a = 0; a < p; ++a)
        res.coeff_stderr[a] = std::sqrt(std::max(0.0, res.covariance[a * p + a]));
    return res;
}

}  // namespace reachlab
