#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nnlif/errors.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

/// Uniform voltage mesh on [V_min, V_F] with both V_R and V_F on nodes.
///
/// Node j sits at V_min + j*dv for j = 0..M.  The reset potential must
/// coincide with a node because the reinjection source is a single-node
/// discrete delta; the constructor therefore rounds the requested layout:
/// dv is chosen as (V_F - V_R)/m with m = ceil((V_F - V_R)/dv_requested),
/// and V_min is pushed left to the nearest node V_R - n*dv covering the
/// request.  M never shrinks and the domain never loses coverage.
struct Grid {
    double V_min = 0.0;
    double V_F = 0.0;
    double V_R = 0.0;
    double dv = 0.0;
    std::size_t M = 0;   ///< index of the last node (V_F); M+1 nodes total
    std::size_t j_R = 0; ///< node index of V_R

    Grid() = default;

    Grid(double v_min_requested, PotentialParams pot, std::size_t m_requested) {
        pot.validate_or_throw();
        if (m_requested < 8) throw ValidationError("grid needs at least 8 intervals");
        if (!(v_min_requested < pot.V_R))
            throw ValidationError("V_min must lie strictly below V_R");
        const double span = pot.V_F - v_min_requested;
        const double dv_req = span / static_cast<double>(m_requested);
        const auto m_right = static_cast<std::size_t>(std::ceil((pot.V_F - pot.V_R) / dv_req - 1e-12));
        dv = (pot.V_F - pot.V_R) / static_cast<double>(m_right);
        const auto n_left = static_cast<std::size_t>(std::ceil((pot.V_R - v_min_requested) / dv - 1e-12));
        M = m_right + n_left;
        j_R = n_left;
        V_F = pot.V_F;
        V_R = pot.V_R;
        V_min = pot.V_R - static_cast<double>(n_left) * dv;
    }

    double node(std::size_t j) const { return V_min + static_cast<double>(j) * dv; }

    std::vector<double> nodes() const {
        std::vector<double> v(M + 1);
        for (std::size_t j = 0; j <= M; ++j) v[j] = node(j);
        return v;
    }

    /// Trapezoidal quadrature weight of node j.
    double weight(std::size_t j) const { return (j == 0 || j == M) ? 0.5 * dv : dv; }
};

} // namespace nnlif
