#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nnlif/errors.hpp"

namespace nnlif::quad {

inline constexpr double default_rel_tol = 1e-10;

/// Adaptive Gauss-Kronrod integration on a finite interval.
///
/// Throws QuadratureFailure when the error estimate does not reach the
/// requested relative tolerance (floored in absolute terms for integrals
/// near zero).
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = default_rel_tol) {
    if (a == b) return 0.0;
    double err = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 15, rel_tol, &err, &l1);
    const double scale = std::max({std::abs(value), l1, 1e-300});
    if (!(err <= 64 * rel_tol * scale) || !std::isfinite(value))
        throw QuadratureFailure("gauss-kronrod did not converge to requested tolerance");
    return value;
}

/// exp(x) clamped so intermediate overflow saturates instead of producing inf
/// (used only where the caller needs the sign/magnitude of an astronomically
/// large integrand, never near a root).
inline double exp_clamped(double x) { return std::exp(std::min(x, 700.0)); }

/// expm1(x)/x with the removable singularity at x = 0 filled in.
inline double expm1_over(double x) {
    if (x == 0.0) return 1.0;
    if (std::abs(x) < 1e-5) return 1.0 + 0.5 * x + x * x / 6.0;
    if (x > 700.0) return exp_clamped(x) / x;
    return std::expm1(x) / x;
}

} // namespace nnlif::quad
