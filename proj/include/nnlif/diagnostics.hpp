#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nnlif/density.hpp"
#include "nnlif/errors.hpp"
#include "nnlif/grid.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

/// One recorded row of the simulation time series.  M_mu is the exponential
/// moment of the excitatory density; E_t the quadratic relative entropy
/// against a reference steady state, present only when a reference was
/// supplied to the run.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass_E = 0.0;
    double mass_I = 0.0;
    double N_E = 0.0;
    double N_I = 0.0;
    double dt = 0.0;
    std::optional<double> M_mu;
    std::optional<double> E_t;
};

/// Reference stationary pair for entropy diagnostics.  Profiles are stored
/// renormalized to unit trapezoidal mass; nodes where a reference profile
/// falls below eps_floor are excluded from the entropy quadrature (the
/// integrand divides by the reference, which decays like a Gaussian on the
/// left, so those nodes would only amplify round-off).
struct EntropyReference {
    PopulationDensity rho_E_inf;
    PopulationDensity rho_I_inf;
    FiringRates rates_inf;
    double eps_floor = 1e-12;

    EntropyReference() = default;

    EntropyReference(PopulationDensity profile_E, PopulationDensity profile_I, FiringRates rates,
                     const Grid& grid, double floor = 1e-12)
        : rho_E_inf(std::move(profile_E)), rho_I_inf(std::move(profile_I)), rates_inf(rates),
          eps_floor(floor) {
        for (auto* p : {&rho_E_inf, &rho_I_inf}) {
            const double m = trapezoid_mass(p->values, grid);
            if (!(m > 0.0)) throw DegenerateProfile("entropy reference profile has no mass");
            for (double& v : p->values) v /= m;
        }
        if (!(rates_inf.N_E > 0.0) || !(rates_inf.N_I > 0.0))
            throw ValidationError("entropy reference rates must be positive");
    }
};

/// Quadratic relative entropy E = sum_alpha int rho_inf (rho/rho_inf - 1)^2.
///
/// Nodes where the reference is below eps_floor are excluded; if the state
/// carries more than 1e-6 of mass on excluded nodes the reference cannot
/// control the state there and ReferenceDegenerate is thrown.
inline double relative_entropy(const NetworkState& state, const EntropyReference& ref,
                               const Grid& grid) {
    double entropy = 0.0;
    double excluded_mass = 0.0;
    for (int pop = 0; pop < 2; ++pop) {
        const auto& rho = (pop == 0) ? state.rho_E.values : state.rho_I.values;
        const auto& inf = (pop == 0) ? ref.rho_E_inf.values : ref.rho_I_inf.values;
        for (std::size_t j = 0; j <= grid.M; ++j) {
            if (inf[j] < ref.eps_floor) {
                excluded_mass += grid.weight(j) * std::abs(rho[j]);
                continue;
            }
            const double ratio = rho[j] / inf[j] - 1.0;
            entropy += grid.weight(j) * inf[j] * ratio * ratio;
        }
    }
    if (excluded_mass > 1e-6)
        throw ReferenceDegenerate("state mass " + std::to_string(excluded_mass) +
                                  " lies outside the support of the entropy reference");
    return entropy;
}

/// Smallness hypothesis under which the relative entropy decays
/// exponentially: E[0] < 1 / (2 max(b_EE + b_IE, b_EI + b_II)).
inline bool entropy_admissibility(const EntropyReference& ref, const NetworkState& initial,
                                  const NetworkParams& net, const Grid& grid) {
    const double coupling = std::max(net.b_EE + net.b_IE, net.b_EI + net.b_II);
    const double e0 = relative_entropy(initial, ref, grid);
    if (coupling <= 0.0) return true;
    return e0 < 1.0 / (2.0 * coupling);
}

/// Result of fitting exp(-mu t) to the recorded entropy tail.
struct DecayFit {
    double mu_hat = 0.0;
    double r_squared = 0.0;
    std::size_t window_begin = 0; ///< index into the eligible-sample list
    std::size_t window_size = 0;
};

/// Least-squares fit of log E[t] on the largest suffix of the eligible
/// samples (E > 1e-10) that decreases monotonically within recorder noise
/// 1e-8.  Throws InsufficientDecay when no strictly decreasing window of at
/// least 10 samples exists; constant series are rejected.
inline DecayFit decay_rate_fit(const std::vector<DiagnosticsRecord>& series) {
    std::vector<double> ts;
    std::vector<double> es;
    for (const auto& row : series) {
        if (row.E_t && *row.E_t > 1e-10) {
            ts.push_back(row.t);
            es.push_back(*row.E_t);
        }
    }
    constexpr std::size_t min_window = 10;
    constexpr double noise = 1e-8;
    if (es.size() < min_window)
        throw InsufficientDecay("fewer than 10 entropy samples above the 1e-10 floor");

    std::size_t begin = es.size() - 1;
    while (begin > 0 && es[begin] <= es[begin - 1] + noise) --begin;
    const std::size_t n = es.size() - begin;
    if (n < min_window || !(es.back() < es[begin]))
        throw InsufficientDecay("no monotone decreasing entropy window of length 10");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = begin; k < es.size(); ++k) {
        const double x = ts[k];
        const double y = std::log(es[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / dn;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / dn;
    for (std::size_t k = begin; k < es.size(); ++k) {
        const double y = std::log(es[k]);
        const double pred = slope * ts[k] + intercept;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    DecayFit fit;
    fit.mu_hat = -slope;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.window_begin = begin;
    fit.window_size = n;
    return fit;
}

} // namespace nnlif
