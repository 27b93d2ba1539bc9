#pragma once

#include <optional>
#include <string>

#include "nnlif/errors.hpp"

namespace nnlif {

/// Population tag.  E = excitatory, I = inhibitory.
enum class Population { E, I };

inline const char* population_name(Population p) { return p == Population::E ? "E" : "I"; }

/// How the diffusion coefficients a_E, a_I are obtained.
enum class DiffusionMode {
    Constant,      ///< a_alpha fixed, independent of the firing rates
    RateDependent, ///< a_alpha = d_E^alpha nu_ext + d_E^alpha N_E + d_I^alpha N_I
};

/// Connectivity and noise parameters of the two-population network.
///
/// Naming convention: b_XY couples source population X onto target
/// population Y, so b_IE is the inhibitory weight felt by the excitatory
/// population.  All b are taken nonnegative; the sign convention (inhibition
/// subtracts) lives in the drift formula.
struct NetworkParams {
    double b_EE = 0.0; ///< excitatory -> excitatory
    double b_IE = 0.0; ///< inhibitory -> excitatory
    double b_EI = 0.0; ///< excitatory -> inhibitory
    double b_II = 0.0; ///< inhibitory -> inhibitory
    double nu_ext = 0.0; ///< external excitatory input rate (>= 0)

    DiffusionMode diffusion = DiffusionMode::Constant;

    /// Constant-mode diffusion coefficients.
    double a_E = 1.0;
    double a_I = 1.0;

    /// Rate-dependent-mode weights, same source/target convention as b.
    double d_EE = 0.0;
    double d_IE = 0.0;
    double d_EI = 0.0;
    double d_II = 0.0;

    std::optional<std::string> validate() const {
        if (b_EE < 0 || b_IE < 0 || b_EI < 0 || b_II < 0)
            return "connectivity parameters must be nonnegative";
        if (nu_ext < 0) return "nu_ext must be nonnegative";
        if (diffusion == DiffusionMode::Constant) {
            if (a_E <= 0 || a_I <= 0) return "constant diffusion coefficients must be positive";
        } else {
            if (d_EE < 0 || d_IE < 0 || d_EI < 0 || d_II < 0)
                return "rate-dependent diffusion weights must be nonnegative";
        }
        return std::nullopt;
    }

    void validate_or_throw() const {
        if (auto msg = validate()) throw ValidationError(*msg);
    }
};

/// Threshold and reset potentials shared by both populations.
struct PotentialParams {
    double V_F = 2.0; ///< firing threshold
    double V_R = 1.0; ///< reset potential

    std::optional<std::string> validate() const {
        if (!(V_R < V_F)) return "V_R must be strictly below V_F";
        return std::nullopt;
    }

    void validate_or_throw() const {
        if (auto msg = validate()) throw ValidationError(*msg);
    }
};

/// Instantaneous population firing rates.
struct FiringRates {
    double N_E = 0.0;
    double N_I = 0.0;
};

} // namespace nnlif
