#pragma once

#include <string>
#include <vector>

#include "nnlif/config.hpp"
#include "nnlif/errors.hpp"

namespace nnlif {

/// A named, fully pinned experiment configuration.  Presets exist so that
/// every figure-level result can be reproduced from a single CLI invocation;
/// the summary records what the run demonstrates.
struct Preset {
    std::string name;
    std::string summary;
    ExperimentConfig config;
};

namespace detail {

inline ExperimentConfig preset_base(const char* name, ExperimentMode mode, double b_EE,
                                    double b_IE, double b_EI, double b_II) {
    ExperimentConfig cfg;
    cfg.mode = mode;
    cfg.mode_set = true;
    cfg.network.b_EE = b_EE;
    cfg.network.b_IE = b_IE;
    cfg.network.b_EI = b_EI;
    cfg.network.b_II = b_II;
    cfg.output_dir = name;
    return cfg;
}

inline void maxwellian_both(ExperimentConfig& cfg, double v0, double var) {
    for (auto* init : {&cfg.initial_E, &cfg.initial_I}) {
        init->set = true;
        init->kind = InitialKind::Maxwellian;
        init->v0 = v0;
        init->var = var;
    }
}

/// Gates suited to runs that approach (or reach) a blow-up: the reinjection
/// delta and the steepening front cost mass at O(dv) burst scale, so the
/// invariant gates are widened rather than disabled.
inline void loose_gates(ExperimentConfig& cfg) {
    cfg.solver.tol_mass = 0.02;
    cfg.solver.tol_negativity = 1e-6;
    cfg.solver.blowup_rate_threshold = 50.0;
}

inline Preset blowup_preset(const char* name, const char* summary, double b_EE, double b_IE,
                            double b_EI, double b_II, double v0, double var) {
    Preset p;
    p.name = name;
    p.summary = summary;
    p.config = preset_base(name, ExperimentMode::Simulate, b_EE, b_IE, b_EI, b_II);
    p.config.grid.V_min = -6.0;
    p.config.grid.M = 800;
    p.config.solver.t_end = 5.0;
    // short stride: the concentrated-data run halts within a few hundred
    // steps and still needs a usable rate series
    p.config.solver.record_every = 5;
    loose_gates(p.config);
    maxwellian_both(p.config, v0, var);
    return p;
}

inline Preset scan_preset(const char* name, const char* summary, double b_EE, double b_IE,
                          double b_EI, double b_II) {
    Preset p;
    p.name = name;
    p.summary = summary;
    p.config = preset_base(name, ExperimentMode::SteadyScan, b_EE, b_IE, b_EI, b_II);
    return p;
}

inline Preset sweep_preset(const char* name, const char* summary, double b_EE, double b_IE,
                           double b_EI, double b_II, const char* param, double start, double stop,
                           double step) {
    Preset p;
    p.name = name;
    p.summary = summary;
    p.config = preset_base(name, ExperimentMode::Bifurcation, b_EE, b_IE, b_EI, b_II);
    p.config.sweep.set = true;
    p.config.sweep.param = param;
    for (int k = 0;; ++k) {
        const double x = start + step * k;
        if (x > stop + 1e-9 * step) break;
        p.config.sweep.values.push_back(x);
    }
    return p;
}

inline Preset stability_preset(const char* name, const char* summary, double b_EE, double b_IE,
                               double b_EI, double b_II, double v_min) {
    Preset p;
    p.name = name;
    p.summary = summary;
    p.config = preset_base(name, ExperimentMode::Stability, b_EE, b_IE, b_EI, b_II);
    p.config.grid.V_min = v_min;
    p.config.grid.M = 400;
    p.config.solver.t_end = 10.0;
    loose_gates(p.config);
    maxwellian_both(p.config, 0.0, 0.25);
    return p;
}

} // namespace detail

inline const std::vector<Preset>& preset_table() {
    static const std::vector<Preset> table = [] {
        std::vector<Preset> t;

        t.push_back(detail::blowup_preset(
            "blowup_bEE",
            "finite-time blow-up from strong recurrent excitation: the excitatory rate "
            "runs away and the solver halts when it crosses the declared threshold",
            3.0, 0.75, 0.5, 0.25, 0.0, 0.5));
        t.push_back(detail::blowup_preset(
            "blowup_ci",
            "finite-time blow-up at weak coupling from initial data concentrated just "
            "below the firing threshold; the exponential-moment certificate is satisfied",
            0.5, 0.25, 0.25, 1.0, 1.83, 0.003));
        t.push_back(detail::blowup_preset(
            "blowup_bII",
            "blow-up persists under strong inhibitory self-coupling: raising b_II does "
            "not tame the excitatory runaway",
            3.0, 0.75, 0.5, 3.0, 0.0, 0.5));

        t.push_back(detail::scan_preset(
            "caso1_left",
            "even-parity regime with no steady state: the closed-loop fixed-point "
            "equation has no admissible root",
            3.0, 0.75, 0.5, 5.0));
        t.push_back(detail::scan_preset(
            "caso1_right",
            "even-parity regime with exactly two steady states (a low-rate and a "
            "high-rate branch)",
            1.8, 0.75, 0.5, 0.25));
        t.push_back(detail::scan_preset(
            "caso2_one",
            "odd-parity regime with a unique steady state at inhibition-dominated "
            "cross coupling",
            0.5, 0.5, 3.0, 0.5));
        t.push_back(detail::scan_preset(
            "caso2_one_b",
            "odd-parity regime that stays at a single steady state despite strong "
            "recurrent excitation, because b_IE is large",
            3.0, 9.0, 0.5, 0.25));
        t.push_back(detail::scan_preset(
            "caso2_three",
            "odd-parity regime with three steady states; only the lowest is stable "
            "under time evolution",
            3.0, 7.0, 0.5, 0.25));

        t.push_back(detail::sweep_preset(
            "uncoupled_sweep",
            "steady-state count along b_EE with the cross couplings switched off; "
            "reproduces the pure excitatory-network landscape",
            0.5, 0.0, 0.0, 0.25, "b_EE", 0.5, 3.5, 0.25));
        t.push_back(detail::sweep_preset(
            "crossed_sweep",
            "the same b_EE sweep with weak cross couplings b_IE = b_EI = 0.1; shows "
            "how the uncoupled landscape deforms",
            0.5, 0.1, 0.1, 0.25, "b_EE", 0.5, 3.5, 0.25));
        t.push_back(detail::sweep_preset(
            "bIE_bifurcation",
            "root count along the inhibitory-to-excitatory weight b_IE at strong "
            "self-excitation: the one-to-three-state transition",
            3.0, 4.5, 0.5, 0.25, "b_IE", 4.5, 9.5, 0.25));

        t.push_back(detail::stability_preset(
            "stability_two",
            "relaxation at the two-state point: runs three initial conditions (two "
            "stationary profiles, one Maxwellian mean 0 var 0.25); the lower branch "
            "attracts, the upper departs",
            1.8, 0.75, 0.5, 0.25, -6.5));
        t.push_back(detail::stability_preset(
            "stability_three",
            "relaxation at the three-state point with the same three-plus-one run "
            "layout; only the lowest-rate state is stable",
            3.0, 7.0, 0.5, 0.25, -6.0));

        return t;
    }();
    return table;
}

inline const Preset& find_preset(const std::string& name) {
    for (const auto& p : preset_table())
        if (p.name == name) return p;
    std::string msg = "unknown preset '" + name + "'; available:";
    for (const auto& p : preset_table()) msg += " " + p.name;
    throw UnknownPreset(msg);
}

inline ExperimentConfig preset_config(const std::string& name) { return find_preset(name).config; }

} // namespace nnlif
