#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

/// Adaptive Gauss-Kronrod on [a, b].
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12, unsigned depth = 20) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

/// Integral over [a, inf).
template <class F>
double integrate_to_inf(F&& f, double a, double tol = 1e-12) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double x) { return f(x); }, a, std::numeric_limits<double>::infinity(), tol);
}

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double stddev(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace oracle
