#pragma once

#include <cmath>
#include <numbers>

namespace fragility {

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF; accurate in both tails through erfc.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// log(Phi(x)) without underflow for very negative x.
inline double log_normal_cdf(double x) {
    if (x > -30.0) {
        return std::log(normal_cdf(x));
    }
    // Asymptotic Mills-ratio expansion.
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

}  // namespace fragility
