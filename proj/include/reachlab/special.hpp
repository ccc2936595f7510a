#pragma once

#include <cmath>
#include <numbers>

#include "reachlab/common.hpp"

namespace reachlab {

// Exponentially scaled modified Bessel function e^{-z} I_0(z), z >= 0.
// Power series for moderate z (all terms positive, so the relative error is
// a few ulps); asymptotic series beyond, where its optimal truncation error
// ~ e^{-2z} is far below double precision.
inline double bessel_i0_scaled(double z) {
    if (z < 0.0) throw ValidationError("bessel_i0_scaled: negative argument");
    if (z <= 30.0) {
        double term = 1.0, sum = 1.0;
        const double q = 0.25 * z * z;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-18) break;
        }
        return sum * std::exp(-z);
    }
    // I_0(z) ~ e^z / sqrt(2 pi z) * sum_k a_k, a_k = prod ((2j-1)^2) / (k! 8^k z^k)
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 40; ++k) {
        double f = (2.0 * k - 1.0);
        term *= f * f / (8.0 * k * z);
        if (term > 1.0) break;  // series started diverging
        sum += term;
        if (term < 1e-18) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

}  // namespace reachlab
