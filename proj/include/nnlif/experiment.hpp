#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nnlif/config.hpp"
#include "nnlif/csv.hpp"
#include "nnlif/diagnostics.hpp"
#include "nnlif/profiles.hpp"
#include "nnlif/solver.hpp"
#include "nnlif/steady_state.hpp"

namespace nnlif {

/// Everything a finished experiment produced, returned so callers (tests,
/// the CLI) can inspect outcomes without re-reading the CSV artifacts.
struct ExperimentResult {
    ExperimentMode mode = ExperimentMode::SteadyScan;
    std::optional<RunStatus> status; ///< primary run status (simulate / stability)
    std::vector<RunOutcome> runs;    ///< primary run first, then per-root runs
    FindResult roots;                ///< steady_scan / stability scan result
    std::vector<SweepRow> sweep_rows;
    std::optional<RegimeReport> regime;
    std::vector<std::string> written; ///< artifact paths, in write order
};

namespace detail {

inline PopulationDensity build_initial(const InitialSpec& spec, Population pop, const Grid& grid,
                                       const NetworkParams& net) {
    if (spec.kind == InitialKind::Maxwellian)
        return maxwellian_initial(pop, grid, spec.v0, spec.var);
    return stationary_profile(pop, grid, FiringRates{spec.N_E, spec.N_I}, net);
}

/// Profile snapshot times: a short geometric ladder 0.1, 0.5, 1, 2, 4, ...
/// capped by t_end, with t_end always the final mark.
inline std::vector<double> snapshot_ladder(double t_end) {
    std::vector<double> marks;
    for (double t : {0.1, 0.5})
        if (t < t_end) marks.push_back(t);
    for (double t = 1.0; t < t_end; t *= 2.0) marks.push_back(t);
    marks.push_back(t_end);
    return marks;
}

/// Commas and newlines would break the one-line-per-row format, so free-text
/// cells (error messages, notes) are flattened before they enter a row.
inline std::string sanitize_cell(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

inline std::string bool_cell(bool b) { return b ? "true" : "false"; }

struct SegmentedRun {
    RunOutcome outcome;
    std::vector<NetworkState> snapshots; ///< .t carries the global time
};

/// Runs the solver in back-to-back segments so density snapshots can be
/// captured at the ladder marks without touching the stepping loop.  The
/// stitched diagnostics series carries global times; the duplicate record at
/// each restart is dropped.
inline SegmentedRun run_segmented(const PopulationDensity& rho_E0, const PopulationDensity& rho_I0,
                                  const NetworkParams& net, const Grid& grid,
                                  const SolverConfig& solver, const EntropyReference* entropy_ref) {
    SegmentedRun out;
    NetworkState cur;
    cur.rho_E = rho_E0;
    cur.rho_I = rho_I0;
    cur.rho_E.pop = Population::E;
    cur.rho_I.pop = Population::I;
    cur.rates = rates_for_state(grid, cur.rho_E.values, cur.rho_I.values, net);
    cur.t = 0.0;
    out.snapshots.push_back(cur);

    out.outcome.status = RunStatus::Completed;
    double t_prev = 0.0;
    const std::vector<double> marks = snapshot_ladder(solver.t_end);
    for (std::size_t k = 0; k < marks.size(); ++k) {
        SolverConfig seg_cfg = solver;
        seg_cfg.t_end = marks[k] - t_prev;
        const RunOutcome seg =
            run_simulation(cur.rho_E, cur.rho_I, net, grid, seg_cfg, entropy_ref);
        for (std::size_t r = (k == 0 ? 0 : 1); r < seg.series.size(); ++r) {
            DiagnosticsRecord row = seg.series[r];
            row.t += t_prev;
            out.outcome.series.push_back(row);
        }
        out.outcome.steps += seg.steps;
        out.outcome.status = seg.status;
        out.outcome.N_E_last = seg.N_E_last;
        cur = seg.final_state;
        cur.t = seg.status == RunStatus::Completed ? marks[k] : t_prev + seg.t_stop;
        out.outcome.t_stop = cur.t;
        out.snapshots.push_back(cur);
        if (seg.status != RunStatus::Completed) break;
        t_prev = marks[k];
    }
    out.outcome.final_state = cur;
    return out;
}

/// Relative entropy is recorded only when it is certain to stay defined for
/// the whole run: a reference profile exists, the initial state lives inside
/// its support, and the initial entropy satisfies the smallness condition
/// under which the entropy is known to decay.
inline std::optional<EntropyReference> entropy_reference_for(const Grid& grid,
                                                             const FindResult& found) {
    if (found.states.empty()) return std::nullopt;
    const SteadyState& lowest = found.states.front();
    if (lowest.profile_E.values.size() != grid.M + 1 ||
        lowest.profile_I.values.size() != grid.M + 1)
        return std::nullopt;
    try {
        return EntropyReference(lowest.profile_E, lowest.profile_I,
                                FiringRates{lowest.N_E, lowest.N_I}, grid);
    } catch (const Error&) {
        return std::nullopt;
    }
}

inline const EntropyReference* gate_entropy(const std::optional<EntropyReference>& ref,
                                            const PopulationDensity& rho_E0,
                                            const PopulationDensity& rho_I0,
                                            const NetworkParams& net, const Grid& grid) {
    if (!ref) return nullptr;
    NetworkState init;
    init.rho_E = rho_E0;
    init.rho_I = rho_I0;
    init.rates = rates_for_state(grid, init.rho_E.values, init.rho_I.values, net);
    try {
        if (!entropy_admissibility(*ref, init, net, grid)) return nullptr;
    } catch (const Error&) {
        return nullptr;
    }
    return &*ref;
}

inline csv::Document series_document(const RunOutcome& run) {
    csv::Document doc({"t", "N_E", "N_I", "mass_E", "mass_I", "dt", "M_mu", "entropy"});
    for (const auto& row : run.series)
        doc.add_row({csv::format_number(row.t), csv::format_number(row.N_E),
                     csv::format_number(row.N_I), csv::format_number(row.mass_E),
                     csv::format_number(row.mass_I), csv::format_number(row.dt),
                     csv::format_number(row.M_mu), csv::format_number(row.E_t)});
    doc.add_comment(std::string("status=") + run_status_name(run.status));
    doc.add_comment("t_stop=" + csv::format_number(run.t_stop));
    doc.add_comment("steps=" + std::to_string(run.steps));
    return doc;
}

inline csv::Document profiles_document(const std::vector<NetworkState>& snapshots,
                                       const Grid& grid) {
    csv::Document doc({"t", "v", "rho_E", "rho_I"});
    for (const auto& snap : snapshots) {
        const std::string t = csv::format_number(snap.t);
        for (std::size_t j = 0; j <= grid.M; ++j)
            doc.add_row({t, csv::format_number(grid.node(j)),
                         csv::format_number(snap.rho_E.values[j]),
                         csv::format_number(snap.rho_I.values[j])});
    }
    return doc;
}

inline csv::Document roots_document(const FindResult& found) {
    csv::Document doc({"N_E_star", "N_I_star", "residual_E", "residual_I"});
    for (const auto& st : found.states)
        doc.add_row({csv::format_number(st.N_E), csv::format_number(st.N_I),
                     csv::format_number(st.residual_E), csv::format_number(st.residual_I)});
    doc.add_comment("n_roots=" + std::to_string(found.states.size()));
    if (found.scan_too_coarse) doc.add_comment("scan_too_coarse=true");
    for (const auto& w : found.warnings) doc.add_comment("warning: " + sanitize_cell(w));
    return doc;
}

inline std::string write_artifact(const std::filesystem::path& dir, const std::string& file,
                                  const csv::Document& doc) {
    const std::filesystem::path path = dir / file;
    csv::write_document(path.string(), doc);
    return path.string();
}

} // namespace detail

/// Executes one experiment and writes its CSV artifacts under
/// config.output_dir.  Artifacts per mode:
///
///   steady_scan  -> roots.csv
///   simulate     -> series.csv, profiles.csv
///   stability    -> roots.csv, series.csv, series_root_<k>.csv per root
///   bifurcation  -> roots.csv (with param_value column), sweep.csv
///   certificate  -> regime.csv
///
/// Identical configs produce byte-identical artifacts regardless of the
/// worker count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate_or_throw();
    ExperimentResult result;
    result.mode = cfg.mode;
    const std::filesystem::path out_dir(cfg.output_dir);
    const NetworkParams& net = cfg.network;
    const PotentialParams& pot = cfg.potentials;

    switch (cfg.mode) {
    case ExperimentMode::SteadyScan: {
        result.roots = find_steady_states(net, pot, ScanOptions{});
        auto doc = detail::roots_document(result.roots);
        doc.add_comment("mode=steady_scan");
        result.written.push_back(detail::write_artifact(out_dir, "roots.csv", doc));
        break;
    }

    case ExperimentMode::Simulate: {
        const Grid grid(cfg.grid.V_min, pot, cfg.grid.M);
        const auto rho_E0 = detail::build_initial(cfg.initial_E, Population::E, grid, net);
        const auto rho_I0 = detail::build_initial(cfg.initial_I, Population::I, grid, net);
        std::optional<EntropyReference> ref;
        try {
            const FindResult found = find_steady_states(net, pot, ScanOptions{}, &grid);
            ref = detail::entropy_reference_for(grid, found);
        } catch (const Error&) {
            // no reference; the entropy column stays empty
        }
        const EntropyReference* gated = detail::gate_entropy(ref, rho_E0, rho_I0, net, grid);
        auto seg = detail::run_segmented(rho_E0, rho_I0, net, grid, cfg.solver, gated);
        result.status = seg.outcome.status;
        result.written.push_back(
            detail::write_artifact(out_dir, "series.csv", detail::series_document(seg.outcome)));
        result.written.push_back(detail::write_artifact(
            out_dir, "profiles.csv", detail::profiles_document(seg.snapshots, grid)));
        result.runs.push_back(std::move(seg.outcome));
        break;
    }

    case ExperimentMode::Stability: {
        const Grid grid(cfg.grid.V_min, pot, cfg.grid.M);
        result.roots = find_steady_states(net, pot, ScanOptions{}, &grid);
        auto roots_doc = detail::roots_document(result.roots);
        roots_doc.add_comment("mode=stability");
        result.written.push_back(detail::write_artifact(out_dir, "roots.csv", roots_doc));

        const auto ref = detail::entropy_reference_for(grid, result.roots);
        const auto rho_E0 = detail::build_initial(cfg.initial_E, Population::E, grid, net);
        const auto rho_I0 = detail::build_initial(cfg.initial_I, Population::I, grid, net);
        RunOutcome primary = run_simulation(rho_E0, rho_I0, net, grid, cfg.solver,
                                            detail::gate_entropy(ref, rho_E0, rho_I0, net, grid));
        result.status = primary.status;
        result.written.push_back(
            detail::write_artifact(out_dir, "series.csv", detail::series_document(primary)));
        result.runs.push_back(std::move(primary));

        for (std::size_t k = 0; k < result.roots.states.size(); ++k) {
            const SteadyState& st = result.roots.states[k];
            RunOutcome run =
                run_simulation(st.profile_E, st.profile_I, net, grid, cfg.solver,
                               detail::gate_entropy(ref, st.profile_E, st.profile_I, net, grid));
            auto doc = detail::series_document(run);
            doc.add_comment("seed_N_E_star=" + csv::format_number(st.N_E));
            doc.add_comment("seed_N_I_star=" + csv::format_number(st.N_I));
            result.written.push_back(detail::write_artifact(
                out_dir, "series_root_" + std::to_string(k) + ".csv", doc));
            result.runs.push_back(std::move(run));
        }
        break;
    }

    case ExperimentMode::Bifurcation: {
        const auto param = sweep_param_from_name(cfg.sweep.param);
        if (!param) throw ValidationError("sweep.param must be one of b_EE, b_IE, b_EI, b_II");
        result.sweep_rows = bifurcation_sweep(net, pot, *param, cfg.sweep.values, ScanOptions{},
                                              nullptr, cfg.solver.workers);

        csv::Document roots_doc(
            {"param_value", "N_E_star", "N_I_star", "residual_E", "residual_I"});
        csv::Document sweep_doc({"param_value", "n_roots", "parity", "f_limit",
                                 "no_state_certified", "two_state_certified", "error"});
        for (const auto& row : result.sweep_rows) {
            const std::string value = csv::format_number(row.value);
            for (const auto& st : row.found.states)
                roots_doc.add_row({value, csv::format_number(st.N_E),
                                   csv::format_number(st.N_I),
                                   csv::format_number(st.residual_E),
                                   csv::format_number(st.residual_I)});
            sweep_doc.add_row(
                {value, std::to_string(row.found.states.size()),
                 row.regime ? parity_name(row.regime->parity) : "",
                 row.regime ? csv::format_number(row.regime->f_limit) : std::string(),
                 row.regime ? detail::bool_cell(row.regime->no_steady_state_certified)
                            : std::string(),
                 row.regime ? detail::bool_cell(row.regime->two_state_certified) : std::string(),
                 detail::sanitize_cell(row.error)});
        }
        roots_doc.add_comment("mode=bifurcation");
        roots_doc.add_comment("sweep_param=" + cfg.sweep.param);
        result.written.push_back(detail::write_artifact(out_dir, "roots.csv", roots_doc));
        result.written.push_back(detail::write_artifact(out_dir, "sweep.csv", sweep_doc));
        break;
    }

    case ExperimentMode::Certificate: {
        result.regime = classify_regime(net, pot);
        const RegimeReport& rep = *result.regime;
        csv::Document doc({"parity", "lhs", "rhs", "f_limit", "f_limit_note",
                           "no_state_certified", "two_state_certified", "blowup_mu",
                           "blowup_M_mu0", "blowup_satisfied"});
        std::string mu_cell, moment_cell, satisfied_cell;
        if (cfg.initial_E.set && net.b_EE > 0.0) {
            const Grid grid(cfg.grid.V_min, pot, cfg.grid.M);
            const auto rho_E0 = detail::build_initial(cfg.initial_E, Population::E, grid, net);
            const BlowupCertificate cert =
                blowup_certificate(rho_E0, net, grid, cfg.solver.mu_override);
            mu_cell = csv::format_number(cert.mu_used);
            moment_cell = csv::format_number(cert.M_mu0);
            satisfied_cell = detail::bool_cell(cert.satisfied);
        }
        doc.add_row({parity_name(rep.parity), csv::format_number(rep.lhs),
                     csv::format_number(rep.rhs), csv::format_number(rep.f_limit),
                     detail::sanitize_cell(rep.f_limit_note),
                     detail::bool_cell(rep.no_steady_state_certified),
                     detail::bool_cell(rep.two_state_certified), mu_cell, moment_cell,
                     satisfied_cell});
        doc.add_comment("b_EE=" + csv::format_number(net.b_EE) +
                        " b_IE=" + csv::format_number(net.b_IE) +
                        " b_EI=" + csv::format_number(net.b_EI) +
                        " b_II=" + csv::format_number(net.b_II));
        doc.add_comment("V_F=" + csv::format_number(pot.V_F) +
                        " V_R=" + csv::format_number(pot.V_R) +
                        " nu_ext=" + csv::format_number(net.nu_ext));
        for (const auto& note : rep.notes) doc.add_comment(detail::sanitize_cell(note));
        result.written.push_back(detail::write_artifact(out_dir, "regime.csv", doc));
        break;
    }
    }
    return result;
}

} // namespace nnlif
