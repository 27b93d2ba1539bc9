#pragma once

#include <cmath>
#include <vector>

#include "nnlif/coefficients.hpp"
#include "nnlif/density.hpp"
#include "nnlif/errors.hpp"
#include "nnlif/grid.hpp"
#include "nnlif/quadrature.hpp"

namespace nnlif {

/// Gaussian bump exp(-(v - v0)^2 / (2 var)) sampled on the grid, clamped to
/// zero at the threshold node and renormalised to trapezoidal mass 1.
inline PopulationDensity maxwellian_initial(Population pop, const Grid& grid, double v0,
                                            double variance) {
    if (!(variance > 0.0)) throw ValidationError("maxwellian variance must be positive");
    PopulationDensity rho;
    rho.pop = pop;
    rho.values.resize(grid.M + 1);
    for (std::size_t j = 0; j <= grid.M; ++j) {
        const double d = grid.node(j) - v0;
        rho.values[j] = std::exp(-d * d / (2.0 * variance));
    }
    rho.values[grid.M] = 0.0;
    const double mass = trapezoid_mass(rho, grid);
    if (!(mass > 1e-12))
        throw DegenerateProfile("maxwellian carries no mass on the grid");
    for (double& x : rho.values) x /= mass;
    return rho;
}

/// Rescale a density to trapezoidal mass 1.
inline void normalize(PopulationDensity& rho, const Grid& grid) {
    const double mass = trapezoid_mass(rho, grid);
    if (!(mass > 1e-12)) throw DegenerateProfile("cannot normalise a massless density");
    for (double& x : rho.values) x /= mass;
}

/// Stationary voltage profile for one population at fixed rates:
///
///   rho(v) = (N/a) exp(-(v - V0)^2 / (2a)) Int_{max(v,V_R)}^{V_F}
///            exp((w - V0)^2 / (2a)) dw
///
/// Evaluated in log space so the growing inner exponential never overflows.
/// When (N_E, N_I) solve the stationary rate system the continuum mass is
/// exactly 1; on the grid it is 1 up to trapezoidal error.
inline PopulationDensity stationary_profile(Population pop, const Grid& grid,
                                            const FiringRates& rates, const NetworkParams& net,
                                            double rel_tol = quad::default_rel_tol) {
    const double N = (pop == Population::E) ? rates.N_E : rates.N_I;
    if (!(N > 0.0))
        throw DegenerateProfile("stationary profile needs a positive firing rate");
    const double a = diffusion_coefficient(pop, rates, net);
    const double v0 = mean_input_potential(pop, rates, net);
    const double inv2a = 1.0 / (2.0 * a);

    auto shifted_integral = [&](double lo, double shift) {
        // log of Int_lo^{V_F} exp((w - v0)^2 / (2a)) dw, computed as
        // shift + log Int exp(... - shift) with shift the max exponent.
        if (!(lo < grid.V_F)) return -std::numeric_limits<double>::infinity();
        const double val = quad::integrate(
            [&](double w) {
                const double e = (w - v0) * (w - v0) * inv2a - shift;
                return std::exp(e);
            },
            lo, grid.V_F, rel_tol);
        return shift + std::log(val);
    };

    auto exponent_max = [&](double lo) {
        const double at_lo = (lo - v0) * (lo - v0) * inv2a;
        const double at_F = (grid.V_F - v0) * (grid.V_F - v0) * inv2a;
        return std::max(at_lo, at_F);
    };

    PopulationDensity rho;
    rho.pop = pop;
    rho.values.assign(grid.M + 1, 0.0);

    const double log_pref = std::log(N / a);
    // Below the reset the inner integral does not depend on v.
    const double log_tail_integral = shifted_integral(grid.V_R, exponent_max(grid.V_R));
    for (std::size_t j = 0; j < grid.M; ++j) {
        const double v = grid.node(j);
        const double shift = (v - v0) * (v - v0) * inv2a;
        double log_integral;
        if (v <= grid.V_R)
            log_integral = log_tail_integral;
        else
            log_integral = shifted_integral(v, exponent_max(v));
        rho.values[j] = std::exp(log_pref - shift + log_integral);
    }
    rho.values[grid.M] = 0.0;
    return rho;
}

} // namespace nnlif
