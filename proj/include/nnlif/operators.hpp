#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nnlif/coefficients.hpp"
#include "nnlif/density.hpp"
#include "nnlif/errors.hpp"
#include "nnlif/grid.hpp"

namespace nnlif {

/// Tiny-negative tolerance for the boundary-flux firing rate: results in
/// [-negative_rate_tolerance, 0) are clamped to zero, anything below throws.
inline constexpr double negative_rate_tolerance = 1e-12;

namespace detail {

/// One-sided second-order voltage derivative of rho at V_F, sign-flipped:
/// -(3 rho_M - 4 rho_{M-1} + rho_{M-2}) / (2 dv).  The firing rate is a
/// times this value.
inline double boundary_outflux_gradient(const Grid& grid, const std::vector<double>& rho) {
    const std::size_t M = grid.M;
    return -(3.0 * rho[M] - 4.0 * rho[M - 1] + rho[M - 2]) / (2.0 * grid.dv);
}

/// Applies the clamp contract shared by the rate extraction paths: a tiny
/// negative value is round-off and becomes zero; a hard negative signals
/// loss of positivity near the boundary and is a failure.
inline double clamp_rate(double value, const char* what) {
    if (value >= 0.0) return value;
    if (value >= -negative_rate_tolerance) return 0.0;
    throw NegativeRate(std::string(what) + " is negative beyond tolerance: " +
                       std::to_string(value));
}

} // namespace detail

/// Discrete firing rate N = -a d(rho)/dv at V_F from the one-sided
/// second-order difference.  Clamps values in [-1e-12, 0) to zero and throws
/// NegativeRate below that.
inline double firing_rate_from_density(const Grid& grid, const std::vector<double>& rho,
                                       double a) {
    return detail::clamp_rate(a * detail::boundary_outflux_gradient(grid, rho), "firing rate");
}

inline double firing_rate_from_density(const Grid& grid, const PopulationDensity& rho, double a) {
    return firing_rate_from_density(grid, rho.values, a);
}

/// Writes the diffusion term a * d2(rho)/dv2 into out (overwriting it),
/// using centered second differences with ghost values rho_{-1} = 0 and
/// rho_{M+1} = -rho_{M-1} (antisymmetric extension about V_F).
inline void diffusion_rhs(const Grid& grid, const std::vector<double>& rho, double a,
                          std::vector<double>& out) {
    const std::size_t M = grid.M;
    const double c = a / (grid.dv * grid.dv);
    out[0] = c * (0.0 - 2.0 * rho[0] + rho[1]);
    for (std::size_t j = 1; j < M; ++j) out[j] = c * (rho[j - 1] - 2.0 * rho[j] + rho[j + 1]);
    out[M] = c * (rho[M - 1] - 2.0 * rho[M] - rho[M - 1]);
}

/// Writes the reinjection source N delta(v - V_R) into out (overwriting it):
/// zero everywhere except N/dv at the reset node, a discrete delta with
/// trapezoidal mass exactly N.
inline void source_rhs(const Grid& grid, double rate, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[grid.j_R] = rate / grid.dv;
}

/// Firing rates induced by the current density pair.
///
/// With constant diffusion the rates follow directly from the boundary
/// gradients.  With rate-dependent diffusion, N_alpha = a_alpha(N) g_alpha
/// couples the two rates linearly; the 2x2 system is solved in closed form.
inline FiringRates rates_for_state(const Grid& grid, const std::vector<double>& rho_E,
                                   const std::vector<double>& rho_I, const NetworkParams& net) {
    if (net.diffusion == DiffusionMode::Constant) {
        return FiringRates{firing_rate_from_density(grid, rho_E, net.a_E),
                           firing_rate_from_density(grid, rho_I, net.a_I)};
    }
    const double g_E = detail::clamp_rate(detail::boundary_outflux_gradient(grid, rho_E),
                                          "boundary gradient (E)");
    const double g_I = detail::clamp_rate(detail::boundary_outflux_gradient(grid, rho_I),
                                          "boundary gradient (I)");
    // N_E = [d_EE (nu + N_E) + d_IE N_I] g_E and the analogous I relation
    // rearrange into a linear system in (N_E, N_I).
    const double a11 = 1.0 - net.d_EE * g_E;
    const double a12 = -net.d_IE * g_E;
    const double a21 = -net.d_EI * g_I;
    const double a22 = 1.0 - net.d_II * g_I;
    const double r1 = net.d_EE * net.nu_ext * g_E;
    const double r2 = net.d_EI * net.nu_ext * g_I;
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 1e-12))
        throw ValidationError("rate-dependent diffusion feedback is singular at this state");
    const double N_E = (r1 * a22 - a12 * r2) / det;
    const double N_I = (a11 * r2 - r1 * a21) / det;
    return FiringRates{detail::clamp_rate(N_E, "excitatory rate"),
                       detail::clamp_rate(N_I, "inhibitory rate")};
}

inline FiringRates rates_for_state(const Grid& grid, const PopulationDensity& rho_E,
                                   const PopulationDensity& rho_I, const NetworkParams& net) {
    return rates_for_state(grid, rho_E.values, rho_I.values, net);
}

} // namespace nnlif
