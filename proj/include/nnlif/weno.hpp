#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nnlif/grid.hpp"

namespace nnlif::weno {

/// Regularization of the nonlinear weights; the classical value.
inline constexpr double epsilon = 1e-6;

/// Stencil half-width: three ghost nodes on each side of the mesh.
inline constexpr std::ptrdiff_t ghost = 3;

namespace detail {
inline double sq(double x) { return x * x; }
} // namespace detail

/// Fifth-order upwind-biased interface value from the five cell values
/// f_{i-2}, ..., f_{i+2}, reconstructed at the interface i+1/2 with the
/// Jiang-Shu smoothness indicators and ideal weights (1/10, 3/5, 3/10).
/// For the opposite wind direction pass the mirrored stencil.
inline double reconstruct(double fm2, double fm1, double f0, double fp1, double fp2) {
    using detail::sq;
    const double q0 = (2.0 * fm2 - 7.0 * fm1 + 11.0 * f0) / 6.0;
    const double q1 = (-fm1 + 5.0 * f0 + 2.0 * fp1) / 6.0;
    const double q2 = (2.0 * f0 + 5.0 * fp1 - fp2) / 6.0;
    const double b0 =
        (13.0 / 12.0) * sq(fm2 - 2.0 * fm1 + f0) + 0.25 * sq(fm2 - 4.0 * fm1 + 3.0 * f0);
    const double b1 = (13.0 / 12.0) * sq(fm1 - 2.0 * f0 + fp1) + 0.25 * sq(fm1 - fp1);
    const double b2 =
        (13.0 / 12.0) * sq(f0 - 2.0 * fp1 + fp2) + 0.25 * sq(3.0 * f0 - 4.0 * fp1 + fp2);
    const double a0 = 0.1 / sq(epsilon + b0);
    const double a1 = 0.6 / sq(epsilon + b1);
    const double a2 = 0.3 / sq(epsilon + b2);
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2);
}

/// Scratch arrays for the advection operator, sized once per grid so the
/// time loop performs no allocation.
struct Workspace {
    std::vector<double> f_plus;  ///< upwind split flux on nodes -ghost..M+ghost
    std::vector<double> f_minus; ///< downwind split flux on the same range
    std::vector<double> flux;    ///< interface fluxes F_{j-1/2}, j = 0..M+1

    void resize(std::size_t M) {
        f_plus.assign(M + 1 + 2 * static_cast<std::size_t>(ghost), 0.0);
        f_minus.assign(M + 1 + 2 * static_cast<std::size_t>(ghost), 0.0);
        flux.assign(M + 2, 0.0);
    }
};

/// Writes the advection term -d(h rho)/dv into out (overwriting it).
///
/// The flux h rho is split globally, f_pm = (h rho +- lambda rho)/2 with
/// lambda = max_j |h_j| over the mesh nodes, and each branch is reconstructed
/// at interfaces with the fifth-order stencil.  Ghost rules: on the left the
/// density is extended by zero (it is negligible at V_min by construction);
/// on the right it is continued antisymmetrically about the absorbing node
/// V_F, and the drift is extrapolated linearly from the last two nodes,
/// which is exact for the affine drift of this model.
inline void advection_rhs(const Grid& grid, const std::vector<double>& rho,
                          const std::vector<double>& h, Workspace& ws, std::vector<double>& out) {
    const auto M = static_cast<std::ptrdiff_t>(grid.M);
    auto at = [&](std::ptrdiff_t j) { return static_cast<std::size_t>(j + ghost); };

    double lambda = 0.0;
    for (std::ptrdiff_t j = 0; j <= M; ++j)
        lambda = std::max(lambda, std::abs(h[static_cast<std::size_t>(j)]));

    for (std::ptrdiff_t j = -ghost; j <= M + ghost; ++j) {
        double r;
        double hj;
        if (j < 0) {
            r = 0.0;
            hj = h[0] + static_cast<double>(-j) * (h[0] - h[1]);
        } else if (j <= M) {
            r = rho[static_cast<std::size_t>(j)];
            hj = h[static_cast<std::size_t>(j)];
        } else {
            r = -rho[static_cast<std::size_t>(2 * M - j)];
            hj = h[static_cast<std::size_t>(M)] +
                 static_cast<double>(j - M) *
                     (h[static_cast<std::size_t>(M)] - h[static_cast<std::size_t>(M - 1)]);
        }
        ws.f_plus[at(j)] = 0.5 * (hj + lambda) * r;
        ws.f_minus[at(j)] = 0.5 * (hj - lambda) * r;
    }

    // flux[k] holds the interface value at node position (k-1) + 1/2.
    for (std::ptrdiff_t k = 0; k <= M + 1; ++k) {
        const std::ptrdiff_t i = k - 1;
        const double fp = reconstruct(ws.f_plus[at(i - 2)], ws.f_plus[at(i - 1)], ws.f_plus[at(i)],
                                      ws.f_plus[at(i + 1)], ws.f_plus[at(i + 2)]);
        const double fm =
            reconstruct(ws.f_minus[at(i + 3)], ws.f_minus[at(i + 2)], ws.f_minus[at(i + 1)],
                        ws.f_minus[at(i)], ws.f_minus[at(i - 1)]);
        ws.flux[static_cast<std::size_t>(k)] = fp + fm;
    }

    const double inv_dv = 1.0 / grid.dv;
    for (std::ptrdiff_t j = 0; j <= M; ++j) {
        out[static_cast<std::size_t>(j)] =
            (ws.flux[static_cast<std::size_t>(j)] - ws.flux[static_cast<std::size_t>(j + 1)]) *
            inv_dv;
    }
}

} // namespace nnlif::weno
