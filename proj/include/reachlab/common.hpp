#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace reachlab {

// Runtime-dimensional point/vector. Ambient dimension is small (n >= 2,
// typically 2 or 3), so no fixed-size machinery is worth the trouble.
using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors. ValidationError maps to CLI exit code 2, NumericalError to 3.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};

struct UnsupportedOperation : ValidationError {
    using ValidationError::ValidationError;
};

struct AmbiguousProjection : NumericalError {
    using NumericalError::NumericalError;
};

struct RejectionStall : NumericalError {
    using NumericalError::NumericalError;
};

struct QuadratureError : NumericalError {
    using NumericalError::NumericalError;
};

struct FitError : NumericalError {
    using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// Small vector helpers
// ---------------------------------------------------------------------------

inline void check_dim(const Vec& x, std::size_t n, const char* what) {
    if (x.size() != n)
        throw DimensionMismatch(std::string(what) + ": expected dimension " +
                                std::to_string(n) + ", got " + std::to_string(x.size()));
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scaled(const Vec& a, double s) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

inline void axpy(Vec& y, double a, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline double dist(const Vec& a, const Vec& b) { return norm(sub(a, b)); }

inline Vec normalized(const Vec& a) {
    double n = norm(a);
    if (n == 0.0) throw NumericalError("cannot normalize zero vector");
    return scaled(a, 1.0 / n);
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec basis_vector(std::size_t n, std::size_t i, double v = 1.0) {
    Vec e(n, 0.0);
    e[i] = v;
    return e;
}

// Volume of the unit ball in R^m.  Integer recursion avoids tgamma noise.
inline double unit_ball_volume(int m) {
    if (m < 0) throw ValidationError("unit_ball_volume: negative dimension");
    double v0 = 1.0, v1 = 2.0;  // omega_0, omega_1
    if (m == 0) return v0;
    if (m == 1) return v1;
    double prev = v0, cur = v1;
    for (int k = 2; k <= m; ++k) {
        double next = prev * 2.0 * std::numbers::pi / k;
        prev = cur;
        cur = next;
    }
    return cur;
}

// Total H^m measure of the unit m-sphere S^m (surface of the unit ball in
// R^{m+1}):  s_m = (m+1) * omega_{m+1}.
inline double unit_sphere_measure(int m) {
    return (m + 1) * unit_ball_volume(m + 1);
}

// ---------------------------------------------------------------------------
// Dense linear solves for tiny systems (n <= ~8).  Partial pivoting.
// ---------------------------------------------------------------------------

// Solves A x = b in place; A is row-major m x m.  Returns false if singular
// relative to the given tolerance.
inline bool solve_linear(std::vector<double> A, Vec b, Vec& x, double tol = 1e-12) {
    const std::size_t m = b.size();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(A[r * m + col]) > std::fabs(A[piv * m + col])) piv = r;
        if (std::fabs(A[piv * m + col]) < tol) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < m; ++c) std::swap(A[col * m + c], A[piv * m + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < m; ++r) {
            double f = A[r * m + col] / A[col * m + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < m; ++c) A[r * m + c] -= f * A[col * m + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(m, 0.0);
    for (std::size_t ri = m; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < m; ++c) s -= A[ri * m + c] * x[c];
        x[ri] = s / A[ri * m + ri];
    }
    return true;
}

// Inverse of a symmetric positive definite matrix (tiny sizes), row-major.
// Throws FitError if the matrix is numerically singular.
inline std::vector<double> invert_spd(const std::vector<double>& A, std::size_t m) {
    std::vector<double> inv(m * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        Vec e(m, 0.0), x;
        e[j] = 1.0;
        if (!solve_linear(A, e, x, 1e-300))
            throw FitError("singular normal matrix");
        for (std::size_t i = 0; i < m; ++i) inv[i * m + j] = x[i];
    }
    return inv;
}

// Orthonormal basis of span{v_i} via modified Gram-Schmidt; vectors with
// residual norm below tol are dropped.  Returns the basis (rank vectors).
inline std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vs, double tol = 1e-10) {
    std::vector<Vec> basis;
    for (const Vec& v : vs) {
        Vec w = v;
        for (const Vec& b : basis) axpy(w, -dot(w, b), b);
        double nw = norm(w);
        if (nw > tol) basis.push_back(scaled(w, 1.0 / nw));
    }
    return basis;
}

inline int affine_rank(const std::vector<Vec>& pts, double tol = 1e-10) {
    if (pts.empty()) return -1;
    std::vector<Vec> diffs;
    for (std::size_t i = 1; i < pts.size(); ++i) diffs.push_back(sub(pts[i], pts[0]));
    return static_cast<int>(orthonormal_basis(diffs, tol).size());
}

}  // namespace reachlab
