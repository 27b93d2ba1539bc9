#pragma once

#include <algorithm>
#include <vector>

#include "nnlif/grid.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

/// Nodal voltage density of one population on a Grid.
///
/// Evolved states keep values[M] = 0 (absorbing threshold) and trapezoidal
/// mass 1 up to the solver's mass tolerance.  The struct itself is plain
/// data; the solver and the profile constructors enforce the invariants.
struct PopulationDensity {
    Population pop = Population::E;
    std::vector<double> values;
};

/// Trapezoidal mass of a nodal function.
inline double trapezoid_mass(const std::vector<double>& values, const Grid& grid) {
    double m = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) m += grid.weight(j) * values[j];
    return m;
}

inline double trapezoid_mass(const PopulationDensity& rho, const Grid& grid) {
    return trapezoid_mass(rho.values, grid);
}

inline double min_value(const PopulationDensity& rho) {
    return *std::min_element(rho.values.begin(), rho.values.end());
}

/// Max-norm distance between two nodal functions of equal length.
inline double max_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

/// Pair of population densities plus the rates they induce at time t.
struct NetworkState {
    PopulationDensity rho_E;
    PopulationDensity rho_I;
    FiringRates rates;
    double t = 0.0;
};

} // namespace nnlif
