#pragma once

#include <string>

#include "nnlif/errors.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

/// Mean input potential V_0^alpha: the drift is h^alpha(v) = V_0^alpha - v.
///
/// The external excitatory rate enters relative to the E->E weight, so it
/// cancels for the excitatory population:
///   V_0^E = b_EE N_E - b_IE N_I
///   V_0^I = b_EI N_E - b_II N_I + (b_EI - b_EE) nu_ext
inline double mean_input_potential(Population pop, const FiringRates& rates,
                                   const NetworkParams& net) {
    if (pop == Population::E) return net.b_EE * rates.N_E - net.b_IE * rates.N_I;
    return net.b_EI * rates.N_E - net.b_II * rates.N_I + (net.b_EI - net.b_EE) * net.nu_ext;
}

/// Drift coefficient h^alpha(v) = -v + V_0^alpha.
inline double drift_coefficient(Population pop, double v, const FiringRates& rates,
                                const NetworkParams& net) {
    return mean_input_potential(pop, rates, net) - v;
}

/// Diffusion coefficient a_alpha, constant or rate-dependent.
/// Throws NonpositiveDiffusion when the result is not strictly positive.
inline double diffusion_coefficient(Population pop, const FiringRates& rates,
                                    const NetworkParams& net) {
    double a = 0.0;
    if (net.diffusion == DiffusionMode::Constant) {
        a = (pop == Population::E) ? net.a_E : net.a_I;
    } else if (pop == Population::E) {
        a = net.d_EE * net.nu_ext + net.d_EE * rates.N_E + net.d_IE * rates.N_I;
    } else {
        a = net.d_EI * net.nu_ext + net.d_EI * rates.N_E + net.d_II * rates.N_I;
    }
    if (!(a > 0.0))
        throw NonpositiveDiffusion(std::string("diffusion coefficient for population ") +
                                   population_name(pop) + " is not positive");
    return a;
}

} // namespace nnlif
