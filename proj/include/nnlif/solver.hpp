#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "nnlif/coefficients.hpp"
#include "nnlif/density.hpp"
#include "nnlif/diagnostics.hpp"
#include "nnlif/errors.hpp"
#include "nnlif/grid.hpp"
#include "nnlif/operators.hpp"
#include "nnlif/params.hpp"
#include "nnlif/weno.hpp"

namespace nnlif {

struct SolverConfig {
    double cfl = 0.4;
    double t_end = 1.0;
    double blowup_rate_threshold = 1e3;
    double dt_floor = 1e-10;
    double tol_mass = 1e-6;        ///< mass gate at recorded times
    double tol_negativity = 1e-10; ///< positivity gate at recorded times
    std::optional<double> mu_override; ///< exponent of the recorded moment
    std::size_t record_every = 50;     ///< step stride between diagnostics rows
    unsigned workers = 1;              ///< population updates run in parallel when >= 2

    void validate_or_throw() const {
        if (!(cfl > 0.0 && cfl <= 1.0)) throw ValidationError("cfl must lie in (0, 1]");
        if (!(t_end > 0.0)) throw ValidationError("t_end must be positive");
        if (!(dt_floor > 0.0)) throw ValidationError("dt_floor must be positive");
        if (!(blowup_rate_threshold > 0.0))
            throw ValidationError("blowup_rate_threshold must be positive");
        if (!(tol_mass > 0.0)) throw ValidationError("tol_mass must be positive");
        if (!(tol_negativity >= 0.0)) throw ValidationError("tol_negativity must be nonnegative");
        if (record_every == 0) throw ValidationError("record_every must be at least 1");
        if (workers == 0) throw ValidationError("workers must be at least 1");
    }
};

enum class RunStatus { Completed, BlowUp, DiffusionFailure };

inline const char* run_status_name(RunStatus s) {
    switch (s) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::BlowUp: return "BlowUp";
    case RunStatus::DiffusionFailure: return "DiffusionFailure";
    }
    return "?";
}

struct RunOutcome {
    NetworkState final_state;
    RunStatus status = RunStatus::Completed;
    double t_stop = 0.0;   ///< time at which the run halted
    double N_E_last = 0.0; ///< excitatory rate at the halt time
    std::vector<DiagnosticsRecord> series;
    std::size_t steps = 0;
};

/// Largest |h^alpha| over the mesh; the drift is affine in v so the maximum
/// sits at one of the endpoints.
inline double max_drift(Population pop, const FiringRates& rates, const NetworkParams& net,
                        const Grid& grid) {
    const double v0 = mean_input_potential(pop, rates, net);
    return std::max(std::abs(v0 - grid.V_min), std::abs(v0 - grid.V_F));
}

/// CFL timestep: cfl * min over populations of (dv / max|h|, dv^2 / (2a)).
/// Throws TimestepCollapse below dt_floor; the caller decides whether a
/// collapse is blow-up evidence (diverging rates) or a genuine failure.
inline double cfl_dt(const FiringRates& rates, const NetworkParams& net, const Grid& grid,
                     double cfl, double dt_floor = 1e-10) {
    double dt = std::numeric_limits<double>::infinity();
    for (Population pop : {Population::E, Population::I}) {
        const double lam = max_drift(pop, rates, net, grid);
        if (lam > 0.0) dt = std::min(dt, grid.dv / lam);
        const double a = diffusion_coefficient(pop, rates, net);
        dt = std::min(dt, grid.dv * grid.dv / (2.0 * a));
    }
    dt *= cfl;
    if (dt < dt_floor)
        throw TimestepCollapse("CFL timestep " + std::to_string(dt) + " fell below the floor " +
                               std::to_string(dt_floor));
    return dt;
}

/// Trapezoidal exponential moment M_mu = int exp(mu v) rho(v) dv.
inline double exponential_moment(const std::vector<double>& rho, double mu, const Grid& grid) {
    double m = 0.0;
    for (std::size_t j = 0; j <= grid.M; ++j)
        m += grid.weight(j) * std::exp(mu * grid.node(j)) * rho[j];
    return m;
}

inline double exponential_moment(const PopulationDensity& rho, double mu, const Grid& grid) {
    return exponential_moment(rho.values, mu, grid);
}

struct BlowupCertificate {
    double mu_used = 0.0;
    double M_mu0 = 0.0;
    bool satisfied = false;
};

/// One-sided non-global-existence certificate on the initial excitatory
/// density: satisfied when b_EE * mu * M_mu(0) > exp(mu V_F).  The default
/// mu = max(2 V_F / a_E, 1 / b_EE) uses a zero a-priori bound on the
/// integrated inhibitory rate, the only choice available before the run;
/// satisfied = false never asserts global existence.
inline BlowupCertificate blowup_certificate(const PopulationDensity& rho_E0,
                                            const NetworkParams& net, const Grid& grid,
                                            std::optional<double> mu_override = std::nullopt) {
    if (!(net.b_EE > 0.0))
        throw ValidationError("the blow-up certificate requires b_EE > 0");
    BlowupCertificate cert;
    if (mu_override) {
        cert.mu_used = *mu_override;
    } else {
        const double a_m = diffusion_coefficient(Population::E, FiringRates{0.0, 0.0}, net);
        cert.mu_used = std::max(2.0 * grid.V_F / a_m, 1.0 / net.b_EE);
    }
    if (!(cert.mu_used > 0.0)) throw ValidationError("certificate exponent mu must be positive");
    cert.M_mu0 = exponential_moment(rho_E0, cert.mu_used, grid);
    cert.satisfied = cert.M_mu0 > 0.0 &&
                     std::log(net.b_EE * cert.mu_used) + std::log(cert.M_mu0) >
                         cert.mu_used * grid.V_F;
    return cert;
}

/// One scalar SSP-RK3 step of du/dt = f(u, t): the same three-stage
/// combination the PDE update uses, exposed so the integrator's order can be
/// verified against exact flows in isolation.
template <class F>
double ssp_rk3_scalar(double u, double t, double dt, F&& f) {
    const double u1 = u + dt * f(u, t);
    const double u2 = 0.75 * u + 0.25 * (u1 + dt * f(u1, t + dt));
    return u / 3.0 + (2.0 / 3.0) * (u2 + dt * f(u2, t + 0.5 * dt));
}

namespace detail {

/// Per-population scratch for one right-hand-side evaluation.
struct LaneWorkspace {
    weno::Workspace weno_ws;
    std::vector<double> h;
    std::vector<double> diff;

    void resize(std::size_t M) {
        weno_ws.resize(M);
        h.assign(M + 1, 0.0);
        diff.assign(M + 1, 0.0);
    }
};

struct SolverWorkspace {
    LaneWorkspace lane_E, lane_I;
    std::vector<double> u1_E, u1_I, u2_E, u2_I; ///< stage densities
    std::vector<double> k_E, k_I;               ///< stage right-hand sides

    void resize(std::size_t M) {
        lane_E.resize(M);
        lane_I.resize(M);
        for (auto* v : {&u1_E, &u1_I, &u2_E, &u2_I, &k_E, &k_I}) v->assign(M + 1, 0.0);
    }
};

/// Full coupled right-hand side at one stage: extracts the stage rates from
/// both densities (the synchronization point), then assembles
/// advection + diffusion + reinjection per population, pinning the absorbing
/// node.  Population updates run on two lanes when workers >= 2; each lane
/// touches only its own buffers, so parallel and serial execution produce
/// identical bits.
inline FiringRates stage_rhs(const Grid& grid, const NetworkParams& net,
                             const std::vector<double>& rho_E, const std::vector<double>& rho_I,
                             SolverWorkspace& ws, std::vector<double>& k_E,
                             std::vector<double>& k_I, unsigned workers) {
    const FiringRates rates = rates_for_state(grid, rho_E, rho_I, net);

    auto lane = [&](Population pop, const std::vector<double>& rho, LaneWorkspace& lw,
                    std::vector<double>& k) {
        const double a = diffusion_coefficient(pop, rates, net);
        const double v0 = mean_input_potential(pop, rates, net);
        for (std::size_t j = 0; j <= grid.M; ++j) lw.h[j] = v0 - grid.node(j);
        weno::advection_rhs(grid, rho, lw.h, lw.weno_ws, k);
        diffusion_rhs(grid, rho, a, lw.diff);
        for (std::size_t j = 0; j <= grid.M; ++j) k[j] += lw.diff[j];
        const double n = (pop == Population::E) ? rates.N_E : rates.N_I;
        k[grid.j_R] += n / grid.dv;
        k[grid.M] = 0.0; // absorbing boundary held exactly
    };

    if (workers >= 2) {
        auto fut = std::async(std::launch::async, [&] {
            lane(Population::I, rho_I, ws.lane_I, k_I);
        });
        lane(Population::E, rho_E, ws.lane_E, k_E);
        fut.get();
    } else {
        lane(Population::E, rho_E, ws.lane_E, k_E);
        lane(Population::I, rho_I, ws.lane_I, k_I);
    }
    return rates;
}

/// Advances both densities by one SSP-RK3 step in place.  The input arrays
/// are only written after every stage evaluation has succeeded, so a failure
/// mid-step leaves the state untouched.
inline void rk3_advance(const Grid& grid, const NetworkParams& net, SolverWorkspace& ws,
                        std::vector<double>& rho_E, std::vector<double>& rho_I, double dt,
                        unsigned workers) {
    const std::size_t n = rho_E.size();

    stage_rhs(grid, net, rho_E, rho_I, ws, ws.k_E, ws.k_I, workers);
    for (std::size_t j = 0; j < n; ++j) {
        ws.u1_E[j] = rho_E[j] + dt * ws.k_E[j];
        ws.u1_I[j] = rho_I[j] + dt * ws.k_I[j];
    }

    stage_rhs(grid, net, ws.u1_E, ws.u1_I, ws, ws.k_E, ws.k_I, workers);
    for (std::size_t j = 0; j < n; ++j) {
        ws.u2_E[j] = 0.75 * rho_E[j] + 0.25 * (ws.u1_E[j] + dt * ws.k_E[j]);
        ws.u2_I[j] = 0.75 * rho_I[j] + 0.25 * (ws.u1_I[j] + dt * ws.k_I[j]);
    }

    stage_rhs(grid, net, ws.u2_E, ws.u2_I, ws, ws.k_E, ws.k_I, workers);
    for (std::size_t j = 0; j < n; ++j) {
        rho_E[j] = rho_E[j] / 3.0 + (2.0 / 3.0) * (ws.u2_E[j] + dt * ws.k_E[j]);
        rho_I[j] = rho_I[j] / 3.0 + (2.0 / 3.0) * (ws.u2_I[j] + dt * ws.k_I[j]);
    }
}

} // namespace detail

/// Coupled right-hand side of the system at the given state, with the rates
/// the evaluation used.  Convenience wrapper over the allocation-free stage
/// evaluation the time loop runs.
struct CoupledRhs {
    std::vector<double> rhs_E;
    std::vector<double> rhs_I;
    FiringRates rates;
};

inline CoupledRhs coupled_rhs(const NetworkState& state, const NetworkParams& net,
                              const Grid& grid) {
    detail::SolverWorkspace ws;
    ws.resize(grid.M);
    CoupledRhs out;
    out.rhs_E.assign(grid.M + 1, 0.0);
    out.rhs_I.assign(grid.M + 1, 0.0);
    out.rates = detail::stage_rhs(grid, net, state.rho_E.values, state.rho_I.values, ws,
                                  out.rhs_E, out.rhs_I, 1);
    return out;
}

/// One SSP-RK3 step (stage combinations 1; 3/4,1/4; 1/3,2/3) with rates
/// re-extracted at every stage; the returned state carries rates recomputed
/// from the final densities.
inline NetworkState rk3_step(const NetworkState& state, double dt, const NetworkParams& net,
                             const Grid& grid) {
    NetworkState next = state;
    detail::SolverWorkspace ws;
    ws.resize(grid.M);
    detail::rk3_advance(grid, net, ws, next.rho_E.values, next.rho_I.values, dt, 1);
    next.rates = rates_for_state(grid, next.rho_E.values, next.rho_I.values, net);
    next.t = state.t + dt;
    return next;
}

/// Evolves the coupled system from the given initial densities until t_end,
/// a blow-up halt, or a diffusion failure.
///
/// Diagnostics are recorded at step stride record_every plus the initial and
/// terminal states.  Mass (within tol_mass of 1) and positivity (no value
/// below -tol_negativity) are enforced at every recorded time; runs expected
/// to approach a blow-up, where the boundary layer outruns any fixed mesh,
/// should widen both gates rather than disable the check.  A CFL collapse
/// while N_E grows is classified as blow-up; NonpositiveDiffusion during a
/// step ends the run with DiffusionFailure and the last consistent state.
inline RunOutcome run_simulation(const PopulationDensity& rho_E0, const PopulationDensity& rho_I0,
                                 const NetworkParams& net, const Grid& grid,
                                 const SolverConfig& config,
                                 const EntropyReference* entropy_ref = nullptr) {
    net.validate_or_throw();
    config.validate_or_throw();
    if (rho_E0.values.size() != grid.M + 1 || rho_I0.values.size() != grid.M + 1)
        throw ValidationError("initial densities do not match the grid");

    RunOutcome out;
    out.final_state.rho_E = rho_E0;
    out.final_state.rho_I = rho_I0;
    out.final_state.rho_E.pop = Population::E;
    out.final_state.rho_I.pop = Population::I;
    out.final_state.t = 0.0;
    auto& rho_E = out.final_state.rho_E.values;
    auto& rho_I = out.final_state.rho_I.values;

    detail::SolverWorkspace ws;
    ws.resize(grid.M);

    FiringRates rates = rates_for_state(grid, rho_E, rho_I, net);
    out.final_state.rates = rates;

    std::optional<double> mu_record = config.mu_override;
    if (!mu_record && net.b_EE > 0.0) {
        try {
            const double a_m = diffusion_coefficient(Population::E, FiringRates{0.0, 0.0}, net);
            mu_record = std::max(2.0 * grid.V_F / a_m, 1.0 / net.b_EE);
        } catch (const NonpositiveDiffusion&) {
            // no usable default exponent; the moment column stays empty
        }
    }
    if (mu_record && !(*mu_record > 0.0)) mu_record.reset();

    auto record = [&](double dt_used) {
        DiagnosticsRecord row;
        row.t = out.final_state.t;
        row.mass_E = trapezoid_mass(rho_E, grid);
        row.mass_I = trapezoid_mass(rho_I, grid);
        row.N_E = rates.N_E;
        row.N_I = rates.N_I;
        row.dt = dt_used;
        if (mu_record) row.M_mu = exponential_moment(rho_E, *mu_record, grid);
        if (entropy_ref) row.E_t = relative_entropy(out.final_state, *entropy_ref, grid);
        for (const double m : {row.mass_E, row.mass_I}) {
            if (std::abs(m - 1.0) > config.tol_mass)
                throw InvariantViolation("mass " + std::to_string(m) +
                                         " drifted beyond tolerance at t = " +
                                         std::to_string(row.t));
        }
        for (const auto* rho : {&rho_E, &rho_I}) {
            const double mn = *std::min_element(rho->begin(), rho->end());
            if (mn < -config.tol_negativity)
                throw InvariantViolation("density fell to " + std::to_string(mn) +
                                         " at t = " + std::to_string(row.t));
        }
        out.series.push_back(row);
    };

    record(0.0);
    double prev_N_E = rates.N_E;
    double last_dt = 0.0;
    out.status = RunStatus::Completed;

    while (true) {
        if (std::max(rates.N_E, rates.N_I) >= config.blowup_rate_threshold) {
            out.status = RunStatus::BlowUp;
            break;
        }
        const double remaining = config.t_end - out.final_state.t;
        if (remaining <= 1e-12 * config.t_end) break;

        double dt;
        try {
            dt = cfl_dt(rates, net, grid, config.cfl, config.dt_floor);
        } catch (const TimestepCollapse&) {
            if (rates.N_E > prev_N_E) {
                out.status = RunStatus::BlowUp;
                break;
            }
            throw;
        }
        prev_N_E = rates.N_E;
        dt = std::min(dt, remaining);

        try {
            detail::rk3_advance(grid, net, ws, rho_E, rho_I, dt, config.workers);
        } catch (const NonpositiveDiffusion&) {
            out.status = RunStatus::DiffusionFailure;
            break;
        }
        out.final_state.t += dt;
        ++out.steps;
        last_dt = dt;
        rates = rates_for_state(grid, rho_E, rho_I, net);
        if (out.steps % config.record_every == 0) record(dt);
    }

    out.final_state.rates = rates;
    out.t_stop = out.final_state.t;
    out.N_E_last = rates.N_E;
    if (out.series.empty() || out.series.back().t < out.final_state.t) record(last_dt);
    return out;
}

} // namespace nnlif
