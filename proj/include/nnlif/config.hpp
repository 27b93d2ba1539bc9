#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nnlif/errors.hpp"
#include "nnlif/params.hpp"
#include "nnlif/solver.hpp"

namespace nnlif {

enum class ExperimentMode { Simulate, SteadyScan, Bifurcation, Stability, Certificate };

inline const char* mode_name(ExperimentMode m) {
    switch (m) {
    case ExperimentMode::Simulate: return "simulate";
    case ExperimentMode::SteadyScan: return "steady_scan";
    case ExperimentMode::Bifurcation: return "bifurcation";
    case ExperimentMode::Stability: return "stability";
    case ExperimentMode::Certificate: return "certificate";
    }
    return "?";
}

inline std::optional<ExperimentMode> mode_from_name(const std::string& s) {
    if (s == "simulate") return ExperimentMode::Simulate;
    if (s == "steady_scan") return ExperimentMode::SteadyScan;
    if (s == "bifurcation") return ExperimentMode::Bifurcation;
    if (s == "stability") return ExperimentMode::Stability;
    if (s == "certificate") return ExperimentMode::Certificate;
    return std::nullopt;
}

enum class InitialKind { Maxwellian, Stationary };

/// Initial condition of one population: a Maxwellian (Gaussian restricted to
/// the grid) or the stationary profile attached to a rate pair.
struct InitialSpec {
    bool set = false;
    InitialKind kind = InitialKind::Maxwellian;
    double v0 = 0.0;  ///< Maxwellian mean
    double var = 0.25; ///< Maxwellian variance
    double N_E = 0.0; ///< stationary-profile rate pair
    double N_I = 0.0;
};

struct GridSpec {
    std::size_t M = 800;
    double V_min = -6.0;
};

struct SweepSpec {
    bool set = false;
    std::string param; ///< one of b_EE, b_IE, b_EI, b_II
    std::vector<double> values;
};

/// One experiment: a mode plus everything needed to reproduce it from the
/// config file alone.
struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::SteadyScan;
    bool mode_set = false;
    NetworkParams network;
    PotentialParams potentials;
    GridSpec grid;
    SolverConfig solver;
    InitialSpec initial_E;
    InitialSpec initial_I;
    SweepSpec sweep;
    std::string output_dir = ".";

    void validate_or_throw() const {
        if (!mode_set) throw ValidationError("mode is required");
        network.validate_or_throw();
        potentials.validate_or_throw();
        solver.validate_or_throw();
        if (grid.M < 8) throw ValidationError("grid.M must be at least 8");
        if (!(grid.V_min < potentials.V_R))
            throw ValidationError("grid.V_min must lie below the reset potential");
        const bool needs_initial =
            mode == ExperimentMode::Simulate || mode == ExperimentMode::Stability;
        if (needs_initial) {
            if (!initial_E.set || !initial_I.set)
                throw ValidationError("initial condition required for both populations in " +
                                      std::string(mode_name(mode)) + " mode");
        }
        for (const auto* init : {&initial_E, &initial_I}) {
            if (!init->set) continue;
            if (init->kind == InitialKind::Maxwellian) {
                if (!(init->var > 0.0))
                    throw ValidationError("Maxwellian initial variance must be positive");
            } else {
                if (!(init->N_E > 0.0) || !(init->N_I > 0.0))
                    throw ValidationError("stationary initial profile needs positive rates");
            }
        }
        if (mode == ExperimentMode::Bifurcation) {
            if (!sweep.set || sweep.values.empty())
                throw ValidationError("bifurcation mode requires sweep.param and sweep.values");
        }
        if (sweep.set) {
            if (sweep.param != "b_EE" && sweep.param != "b_IE" && sweep.param != "b_EI" &&
                sweep.param != "b_II")
                throw ValidationError("sweep.param must be one of b_EE, b_IE, b_EI, b_II");
            for (double v : sweep.values)
                if (!(v >= 0.0)) throw ValidationError("sweep values must be nonnegative");
        }
        if (output_dir.empty()) throw ValidationError("output_dir must not be empty");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_number(const std::string& v, std::size_t line) {
    const std::string t = trim(v);
    if (t.empty()) throw ParseError("empty numeric value", line);
    char* end = nullptr;
    const double x = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) throw ParseError("malformed number '" + t + "'", line);
    return x;
}

inline std::size_t parse_index(const std::string& v, std::size_t line) {
    const double x = parse_number(v, line);
    if (!(x >= 0.0) || x != static_cast<double>(static_cast<std::size_t>(x)))
        throw ParseError("expected a nonnegative integer, got '" + trim(v) + "'", line);
    return static_cast<std::size_t>(x);
}

/// Sweep values accept either a comma list "0.5, 0.75, 1" or a range
/// "start:stop:step" with stop inclusive up to round-off.
inline std::vector<double> parse_values(const std::string& v, std::size_t line) {
    std::vector<double> out;
    const std::string t = trim(v);
    if (t.find(':') != std::string::npos) {
        const std::size_t c1 = t.find(':');
        const std::size_t c2 = t.find(':', c1 + 1);
        if (c2 == std::string::npos) throw ParseError("range needs start:stop:step", line);
        const double start = parse_number(t.substr(0, c1), line);
        const double stop = parse_number(t.substr(c1 + 1, c2 - c1 - 1), line);
        const double step = parse_number(t.substr(c2 + 1), line);
        if (!(step > 0.0) || stop < start)
            throw ParseError("range needs step > 0 and stop >= start", line);
        for (int k = 0;; ++k) {
            const double x = start + step * k;
            if (x > stop + 1e-9 * step) break;
            out.push_back(x);
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= t.size()) {
        const std::size_t c = t.find(',', pos);
        const std::string item = c == std::string::npos ? t.substr(pos) : t.substr(pos, c - pos);
        out.push_back(parse_number(item, line));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (out.empty()) throw ParseError("empty value list", line);
    return out;
}

inline void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      std::size_t line) {
    auto num = [&] { return parse_number(value, line); };
    auto idx = [&] { return parse_index(value, line); };

    if (key == "mode") {
        const auto m = mode_from_name(trim(value));
        if (!m) throw ParseError("unknown mode '" + trim(value) + "'", line);
        cfg.mode = *m;
        cfg.mode_set = true;
    } else if (key == "output_dir") {
        cfg.output_dir = trim(value);
    } else if (key == "network.b_EE") {
        cfg.network.b_EE = num();
    } else if (key == "network.b_IE") {
        cfg.network.b_IE = num();
    } else if (key == "network.b_EI") {
        cfg.network.b_EI = num();
    } else if (key == "network.b_II") {
        cfg.network.b_II = num();
    } else if (key == "network.nu_ext") {
        cfg.network.nu_ext = num();
    } else if (key == "network.a_E") {
        cfg.network.a_E = num();
    } else if (key == "network.a_I") {
        cfg.network.a_I = num();
    } else if (key == "network.diffusion") {
        const std::string t = trim(value);
        if (t == "constant")
            cfg.network.diffusion = DiffusionMode::Constant;
        else if (t == "rate_dependent")
            cfg.network.diffusion = DiffusionMode::RateDependent;
        else
            throw ParseError("unknown diffusion mode '" + t + "'", line);
    } else if (key == "network.d_EE") {
        cfg.network.d_EE = num();
    } else if (key == "network.d_IE") {
        cfg.network.d_IE = num();
    } else if (key == "network.d_EI") {
        cfg.network.d_EI = num();
    } else if (key == "network.d_II") {
        cfg.network.d_II = num();
    } else if (key == "potentials.V_F") {
        cfg.potentials.V_F = num();
    } else if (key == "potentials.V_R") {
        cfg.potentials.V_R = num();
    } else if (key == "grid.M") {
        cfg.grid.M = idx();
    } else if (key == "grid.V_min") {
        cfg.grid.V_min = num();
    } else if (key == "solver.cfl") {
        cfg.solver.cfl = num();
    } else if (key == "solver.t_end") {
        cfg.solver.t_end = num();
    } else if (key == "solver.blowup_rate_threshold") {
        cfg.solver.blowup_rate_threshold = num();
    } else if (key == "solver.dt_floor") {
        cfg.solver.dt_floor = num();
    } else if (key == "solver.tol_mass") {
        cfg.solver.tol_mass = num();
    } else if (key == "solver.tol_negativity") {
        cfg.solver.tol_negativity = num();
    } else if (key == "solver.mu_override") {
        cfg.solver.mu_override = num();
    } else if (key == "solver.record_every") {
        cfg.solver.record_every = idx();
    } else if (key == "solver.workers") {
        const std::size_t w = idx();
        cfg.solver.workers = static_cast<unsigned>(w);
    } else if (key == "sweep.param") {
        cfg.sweep.param = trim(value);
        cfg.sweep.set = true;
    } else if (key == "sweep.values") {
        cfg.sweep.values = parse_values(value, line);
        cfg.sweep.set = true;
    } else if (key.rfind("initial.", 0) == 0) {
        const std::string rest = key.substr(8);
        const std::size_t dot = rest.find('.');
        if (dot == std::string::npos) throw ParseError("unknown key '" + key + "'", line);
        const std::string pop = rest.substr(0, dot);
        const std::string field = rest.substr(dot + 1);
        InitialSpec* spec = nullptr;
        if (pop == "E")
            spec = &cfg.initial_E;
        else if (pop == "I")
            spec = &cfg.initial_I;
        else
            throw ParseError("initial population must be E or I in '" + key + "'", line);
        spec->set = true;
        if (field == "type") {
            const std::string t = trim(value);
            if (t == "maxwellian")
                spec->kind = InitialKind::Maxwellian;
            else if (t == "stationary")
                spec->kind = InitialKind::Stationary;
            else
                throw ParseError("unknown initial type '" + t + "'", line);
        } else if (field == "v0") {
            spec->v0 = num();
        } else if (field == "var") {
            spec->var = num();
        } else if (field == "N_E") {
            spec->N_E = num();
        } else if (field == "N_I") {
            spec->N_I = num();
        } else {
            throw ParseError("unknown key '" + key + "'", line);
        }
    } else {
        throw ParseError("unknown key '" + key + "'", line);
    }
}

} // namespace detail

/// Parses a flat `key = value` document: one assignment per line, `#` starts
/// a comment, dotted keys address nested fields.  Keys may appear once.
/// Throws ParseError with the offending line number, then ValidationError if
/// the assembled config violates an invariant.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::map<std::string, std::size_t> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line =
            nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (!line.empty()) {
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected 'key = value'", line_no);
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError("empty key", line_no);
            if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no);
            if (const auto it = seen.find(key); it != seen.end())
                throw ParseError("duplicate key '" + key + "' (first on line " +
                                     std::to_string(it->second) + ")",
                                 line_no);
            seen[key] = line_no;
            detail::apply_key(cfg, key, value, line_no);
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    cfg.validate_or_throw();
    return cfg;
}

namespace detail {

/// Shortest decimal that round-trips the double exactly.
inline std::string config_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    double back = std::strtod(buf, nullptr);
    if (back == x) {
        for (int prec = 1; prec <= 16; ++prec) {
            char probe[40];
            std::snprintf(probe, sizeof probe, "%.*g", prec, x);
            if (std::strtod(probe, nullptr) == x) return probe;
        }
    }
    return buf;
}

} // namespace detail

/// Emits a document parse_config maps back onto the same config.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    };
    auto kn = [&](const std::string& k, double v) { kv(k, detail::config_number(v)); };

    kv("mode", mode_name(cfg.mode));
    kv("output_dir", cfg.output_dir);
    kn("network.b_EE", cfg.network.b_EE);
    kn("network.b_IE", cfg.network.b_IE);
    kn("network.b_EI", cfg.network.b_EI);
    kn("network.b_II", cfg.network.b_II);
    kn("network.nu_ext", cfg.network.nu_ext);
    kn("network.a_E", cfg.network.a_E);
    kn("network.a_I", cfg.network.a_I);
    kv("network.diffusion",
       cfg.network.diffusion == DiffusionMode::Constant ? "constant" : "rate_dependent");
    if (cfg.network.diffusion == DiffusionMode::RateDependent) {
        kn("network.d_EE", cfg.network.d_EE);
        kn("network.d_IE", cfg.network.d_IE);
        kn("network.d_EI", cfg.network.d_EI);
        kn("network.d_II", cfg.network.d_II);
    }
    kn("potentials.V_F", cfg.potentials.V_F);
    kn("potentials.V_R", cfg.potentials.V_R);
    kv("grid.M", std::to_string(cfg.grid.M));
    kn("grid.V_min", cfg.grid.V_min);
    kn("solver.cfl", cfg.solver.cfl);
    kn("solver.t_end", cfg.solver.t_end);
    kn("solver.blowup_rate_threshold", cfg.solver.blowup_rate_threshold);
    kn("solver.dt_floor", cfg.solver.dt_floor);
    kn("solver.tol_mass", cfg.solver.tol_mass);
    kn("solver.tol_negativity", cfg.solver.tol_negativity);
    if (cfg.solver.mu_override) kn("solver.mu_override", *cfg.solver.mu_override);
    kv("solver.record_every", std::to_string(cfg.solver.record_every));
    kv("solver.workers", std::to_string(cfg.solver.workers));
    const std::pair<const InitialSpec*, const char*> inits[] = {{&cfg.initial_E, "E"},
                                                                {&cfg.initial_I, "I"}};
    for (const auto& [spec, pop] : inits) {
        if (!spec->set) continue;
        const std::string prefix = std::string("initial.") + pop + ".";
        if (spec->kind == InitialKind::Maxwellian) {
            kv(prefix + "type", "maxwellian");
            kn(prefix + "v0", spec->v0);
            kn(prefix + "var", spec->var);
        } else {
            kv(prefix + "type", "stationary");
            kn(prefix + "N_E", spec->N_E);
            kn(prefix + "N_I", spec->N_I);
        }
    }
    if (cfg.sweep.set) {
        kv("sweep.param", cfg.sweep.param);
        std::string vals;
        for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
            if (i) vals += ',';
            vals += detail::config_number(cfg.sweep.values[i]);
        }
        kv("sweep.values", vals);
    }
    return out;
}

} // namespace nnlif
