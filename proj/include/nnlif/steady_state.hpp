#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nnlif/coefficients.hpp"
#include "nnlif/density.hpp"
#include "nnlif/errors.hpp"
#include "nnlif/grid.hpp"
#include "nnlif/params.hpp"
#include "nnlif/profiles.hpp"
#include "nnlif/quadrature.hpp"

namespace nnlif {

/// Threshold and reset in units of the population's noise scale:
/// w = (V - V_0^alpha) / sqrt(a_alpha).
struct ReducedVariables {
    double w_F = 0.0;
    double w_R = 0.0;
};

inline ReducedVariables reduced_variables(Population pop, const FiringRates& rates,
                                          const NetworkParams& net, const PotentialParams& pot) {
    const double a = diffusion_coefficient(pop, rates, net);
    const double v0 = mean_input_potential(pop, rates, net);
    const double inv_s = 1.0 / std::sqrt(a);
    return {(pot.V_F - v0) * inv_s, (pot.V_R - v0) * inv_s};
}

namespace detail {

/// Integrand of the stationary rate kernel
///   K(w_F, w_R) = Int_0^inf exp(-s^2/2) (exp(s w_F) - exp(s w_R)) / s ds,
/// written as exp(-s^2/2 + s w_F) (1 - exp(-s (w_F - w_R))) / s so it is a
/// product of positive factors: no cancellation for any (w_F, w_R) with
/// w_R < w_F, and the removable singularity at s = 0 evaluates to w_F - w_R.
inline double rate_kernel_integrand(double s, double w_F, double w_R) {
    if (s <= 0.0) return w_F - w_R;
    const double lead = -0.5 * s * s + s * w_F;
    return std::exp(std::min(lead, 690.0)) * (-std::expm1(-s * (w_F - w_R))) / s;
}

/// Truncation point: past s_star the integrand is below 1e-18 of its peak.
inline double rate_kernel_cutoff(double w_F) {
    if (w_F > 0.0) return w_F + std::sqrt(w_F * w_F + 82.9);
    return std::min(9.11, 41.45 / std::max(-w_F, 4.55));
}

/// Beyond this point the integrand peak exp(w_F^2/2) crowds the top of
/// double range and adaptive quadrature stops converging, while the kernel
/// itself is astronomically far from any root of the rate system (values
/// ~1e194 and up).  The Laplace evaluation at the peak s = w_F,
///   K ~ sqrt(2 pi)/w_F exp(w_F^2/2) (1 + 1/w_F^2) (1 - exp(-w_F (w_F-w_R))),
/// has relative error O(w_F^-4) and keeps bracket searches monotone and
/// sign-correct, saturating at exp(700) once the true value overflows.
inline constexpr double rate_kernel_asymptotic_threshold = 30.0;

inline double rate_kernel(double w_F, double w_R, double rel_tol = quad::default_rel_tol) {
    if (!(w_R < w_F)) throw ValidationError("rate kernel needs w_R < w_F");
    if (w_F >= rate_kernel_asymptotic_threshold) {
        const double gap_factor = -std::expm1(-std::min(w_F * (w_F - w_R), 700.0));
        const double prefactor = std::sqrt(2.0 * std::numbers::pi_v<double>) / w_F *
                                 (1.0 + 1.0 / (w_F * w_F));
        return quad::exp_clamped(0.5 * w_F * w_F + std::log(prefactor * gap_factor));
    }
    const double s_star = rate_kernel_cutoff(w_F);
    return quad::integrate([=](double s) { return rate_kernel_integrand(s, w_F, w_R); }, 0.0,
                           s_star, rel_tol);
}

/// Scaled complementary error function exp(x^2) erfc(x), stable for large x.
/// For moderate arguments the libm erfc is accurate enough; in the deep tail
/// the Laplace continued fraction
///   sqrt(pi) erfcx(x) = 1 / (x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
/// is evaluated with the modified Lentz scheme (a_k = k/2, b_k = x).
inline double erfcx(double x) {
    if (x < 2.5) return std::exp(x * x) * std::erfc(x);
    constexpr double tiny = 1e-300;
    double f = x;
    double c = f;
    double d = 0.0;
    for (int k = 1; k <= 400; ++k) {
        const double a = 0.5 * k;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::numbers::inv_sqrtpi_v<double> / f;
}

/// G(w) = Int_0^inf exp(-s^2/2 + s w) ds = sqrt(pi/2) exp(w^2/2) erfc(-w/sqrt(2)).
inline double gauss_tilt_integral(double w) {
    constexpr double sqrt_half_pi = 1.2533141373155002512;
    if (w <= 0.0) return sqrt_half_pi * erfcx(-w / std::numbers::sqrt2_v<double>);
    // erfcx(-y) = 2 exp(y^2) - erfcx(y) for y = w/sqrt(2)
    const double y = w / std::numbers::sqrt2_v<double>;
    return sqrt_half_pi * (2.0 * quad::exp_clamped(y * y) - erfcx(y));
}

} // namespace detail

/// Stationary rate integral for the inhibitory population: at a steady state
/// N_I * I2(N_E, N_I) = 1.
inline double I2_eval(double N_E, double N_I, const NetworkParams& net, const PotentialParams& pot,
                      double rel_tol = quad::default_rel_tol) {
    const auto rv = reduced_variables(Population::I, FiringRates{N_E, N_I}, net, pot);
    return detail::rate_kernel(rv.w_F, rv.w_R, rel_tol);
}

/// Stationary rate integral for the excitatory population: at a steady state
/// N_E * I1(N_E, N_I) = 1.
inline double I1_eval(double N_E, double N_I, const NetworkParams& net, const PotentialParams& pot,
                      double rel_tol = quad::default_rel_tol) {
    const auto rv = reduced_variables(Population::E, FiringRates{N_E, N_I}, net, pot);
    return detail::rate_kernel(rv.w_F, rv.w_R, rel_tol);
}

/// Unique solution N_I(N_E) of N_I * I2(N_E, N_I) = 1, found by bracket
/// doubling from [0, 1] and bisection down to the residual tolerance.
inline double solve_NI(double N_E, const NetworkParams& net, const PotentialParams& pot,
                       double residual_tol = 1e-8, double rel_tol = quad::default_rel_tol) {
    auto g = [&](double n_i) { return n_i * I2_eval(N_E, n_i, net, pot, rel_tol) - 1.0; };
    double lo = 0.0;
    double hi = 1.0;
    double g_hi = g(hi);
    while (g_hi <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6)
            throw BracketFailure("solve_NI: no sign change up to N_I = 1e6");
        g_hi = g(hi);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) <= residual_tol) return mid;
        if (gm > 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    throw BracketFailure("solve_NI: bisection stalled above the residual tolerance");
}

/// Derivative of the inhibitory branch N_I(N_E), from implicit differentiation
/// of N_I I2 = 1:
///   N_I'(N_E) = b_EI N_I^2 J / (sqrt(a_I) + b_II N_I^2 J),
///   J = Int_0^inf exp(-s^2/2) (exp(s w~_F) - exp(s w~_R)) ds.
/// Valid in constant-diffusion mode (the derivation holds a_I fixed).
inline double NI_slope(double N_E, const NetworkParams& net, const PotentialParams& pot,
                       double residual_tol = 1e-10, double rel_tol = quad::default_rel_tol) {
    if (net.diffusion != DiffusionMode::Constant)
        throw ValidationError("NI_slope requires constant diffusion mode");
    const double n_i = solve_NI(N_E, net, pot, residual_tol, rel_tol);
    const auto rv = reduced_variables(Population::I, FiringRates{N_E, n_i}, net, pot);
    const double J = detail::gauss_tilt_integral(rv.w_F) - detail::gauss_tilt_integral(rv.w_R);
    const double sqrt_a = std::sqrt(net.a_I);
    const double n2j = n_i * n_i * J;
    return net.b_EI * n2j / (sqrt_a + net.b_II * n2j);
}

/// Excitatory closure F(N_E) = N_E * I1(N_E, N_I(N_E)); steady states of the
/// coupled system are the solutions of F(N_E) = 1.
inline double F_of_NE(double N_E, const NetworkParams& net, const PotentialParams& pot,
                      double residual_tol = 1e-10, double rel_tol = quad::default_rel_tol) {
    if (N_E == 0.0) return 0.0;
    const double n_i = solve_NI(N_E, net, pot, residual_tol, rel_tol);
    return N_E * I1_eval(N_E, n_i, net, pot, rel_tol);
}

/// Limit of F(N_E) as N_E -> infinity.  Finite value
///   (V_F - V_R)(V_F - V_R + b_II) / (b_EE (V_F - V_R) + b_EE b_II - b_IE b_EI)
/// when b_EI b_IE < b_EE b_II, or when b_EI b_IE > b_EE b_II and
/// b_EI/(V_F - V_R + b_II) < b_EE/b_IE; +infinity when the latter comparison
/// is reversed.  Boundary ties are outside the covered cases.
inline double F_limit(const NetworkParams& net, const PotentialParams& pot) {
    const double vfr = pot.V_F - pot.V_R;
    const double p = net.b_EI * net.b_IE;
    const double q = net.b_EE * net.b_II;
    const double denom = net.b_EE * vfr + q - p;
    if (p < q) return vfr * (vfr + net.b_II) / denom;
    if (p > q) {
        const double lhs = net.b_EI / (vfr + net.b_II);
        const double rhs = net.b_EE / net.b_IE; // b_IE > 0 whenever p > q >= 0
        if (lhs < rhs) return vfr * (vfr + net.b_II) / denom;
        if (lhs > rhs) return std::numeric_limits<double>::infinity();
        throw UndefinedLimit("F limit: asymptotic slope comparison is a tie");
    }
    throw UndefinedLimit("F limit: b_EI b_IE = b_EE b_II boundary case");
}

/// One steady state of the coupled system, with residuals of both implicit
/// equations and (optionally) the reconstructed voltage profiles.
struct SteadyState {
    double N_E = 0.0;
    double N_I = 0.0;
    double residual_E = 0.0;
    double residual_I = 0.0;
    PopulationDensity profile_E;
    PopulationDensity profile_I;
};

struct ScanOptions {
    double N_E_max = 50.0;
    double N_E_min = 1e-4;
    std::size_t n_points = 512;
    double residual_tol = 1e-8;
    double rel_tol = quad::default_rel_tol;
};

struct FindResult {
    std::vector<SteadyState> states;
    bool scan_too_coarse = false;
    std::vector<std::string> warnings;
};

namespace detail {

inline double f_minus_one(double n_e, const NetworkParams& net, const PotentialParams& pot,
                          const ScanOptions& scan) {
    return F_of_NE(n_e, net, pot, 0.01 * scan.residual_tol, scan.rel_tol) - 1.0;
}

inline double refine_root(double lo, double hi, double r_lo, const NetworkParams& net,
                          const PotentialParams& pot, const ScanOptions& scan) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double rm = f_minus_one(mid, net, pot, scan);
        if (std::abs(rm) <= scan.residual_tol) return mid;
        if ((rm > 0.0) == (r_lo > 0.0))
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    throw BracketFailure("steady-state refinement stalled above the residual tolerance");
}

} // namespace detail

/// Scan F(N_E) - 1 on a log-spaced grid over (0, N_E_max], bisect every
/// bracketed sign change, deduplicate, and reconstruct profiles when a grid
/// is supplied.  Near-tangency (small |F-1| without a sign change) and
/// adjacent brackets are reported as warnings, not errors.
inline FindResult find_steady_states(const NetworkParams& net, const PotentialParams& pot,
                                     const ScanOptions& scan = {}, const Grid* grid = nullptr) {
    net.validate_or_throw();
    pot.validate_or_throw();
    FindResult out;
    const std::size_t n = std::max<std::size_t>(scan.n_points, 8);
    std::vector<double> xs(n);
    std::vector<double> rs(n);
    const double log_lo = std::log(scan.N_E_min);
    const double step = (std::log(scan.N_E_max) - log_lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::exp(log_lo + step * static_cast<double>(i));
        rs[i] = detail::f_minus_one(xs[i], net, pot, scan);
    }

    std::vector<double> roots;
    // F(0) = 0, so a positive residual at the first scan point means a root
    // below the scan window; bracket it against an effectively-zero abscissa.
    if (rs[0] > 0.0)
        roots.push_back(detail::refine_root(1e-12, xs[0], -1.0, net, pot, scan));
    std::size_t last_bracket = n;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (rs[i] == 0.0) {
            roots.push_back(xs[i]);
            continue;
        }
        if ((rs[i] > 0.0) != (rs[i + 1] > 0.0)) {
            if (last_bracket + 1 == i) {
                out.scan_too_coarse = true;
                out.warnings.push_back("adjacent sign-change brackets near N_E = " +
                                       std::to_string(xs[i]) + "; scan may be too coarse");
            }
            roots.push_back(detail::refine_root(xs[i], xs[i + 1], rs[i], net, pot, scan));
            last_bracket = i;
        } else if (i > 0 && std::abs(rs[i]) < 1e-4 && std::abs(rs[i]) < std::abs(rs[i - 1]) &&
                   std::abs(rs[i]) < std::abs(rs[i + 1])) {
            out.warnings.push_back("suspected double root near N_E = " + std::to_string(xs[i]) +
                                   " (|F-1| = " + std::to_string(std::abs(rs[i])) +
                                   " without sign change)");
        }
    }

    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-6; }),
                roots.end());

    for (double n_e : roots) {
        SteadyState st;
        st.N_E = n_e;
        st.N_I = solve_NI(n_e, net, pot, 0.01 * scan.residual_tol, scan.rel_tol);
        st.residual_E = std::abs(n_e * I1_eval(n_e, st.N_I, net, pot, scan.rel_tol) - 1.0);
        st.residual_I = std::abs(st.N_I * I2_eval(n_e, st.N_I, net, pot, scan.rel_tol) - 1.0);
        if (grid) {
            const FiringRates rates{st.N_E, st.N_I};
            st.profile_E = stationary_profile(Population::E, *grid, rates, net, scan.rel_tol);
            st.profile_I = stationary_profile(Population::I, *grid, rates, net, scan.rel_tol);
        }
        out.states.push_back(std::move(st));
    }
    return out;
}

enum class Parity { Even, Odd, Degenerate, Uncoupled };

inline const char* parity_name(Parity p) {
    switch (p) {
        case Parity::Even: return "even";
        case Parity::Odd: return "odd";
        case Parity::Degenerate: return "degenerate";
        default: return "uncoupled";
    }
}

/// Static classification of the steady-state landscape.
///
/// The parity statement compares lhs = (V_F - V_R)^2 against
/// rhs = (V_F - V_R)(b_EE - b_II) + b_EE b_II - b_IE b_EI: lhs < rhs means an
/// even number of steady states (possibly zero), lhs > rhs an odd number.
/// The certificates are sufficient conditions only; `false` means unproven,
/// not disproven.
struct RegimeReport {
    double lhs = 0.0;
    double rhs = 0.0;
    Parity parity = Parity::Uncoupled;
    std::optional<double> f_limit;      ///< +inf encodes the divergent case
    std::string f_limit_note;           ///< set when the limit is undefined
    bool no_steady_state_certified = false;
    bool two_state_certified = false;
    std::vector<std::string> notes;
};

inline RegimeReport classify_regime(const NetworkParams& net, const PotentialParams& pot) {
    net.validate_or_throw();
    pot.validate_or_throw();
    if (net.diffusion != DiffusionMode::Constant)
        throw ValidationError("classify_regime requires constant diffusion mode");
    RegimeReport rep;
    const double vfr = pot.V_F - pot.V_R;
    rep.lhs = vfr * vfr;
    rep.rhs = vfr * (net.b_EE - net.b_II) + net.b_EE * net.b_II - net.b_IE * net.b_EI;

    try {
        rep.f_limit = F_limit(net, pot);
    } catch (const UndefinedLimit& e) {
        rep.f_limit_note = e.what();
    }

    if (!(net.b_IE > 0.0) || !(net.b_EI > 0.0)) {
        rep.parity = Parity::Uncoupled;
        rep.notes.push_back("parity statement needs both cross couplings positive");
        return rep;
    }
    const double tie_tol = 1e-12 * std::max({1.0, rep.lhs, std::abs(rep.rhs)});
    if (std::abs(rep.lhs - rep.rhs) <= tie_tol) {
        rep.parity = Parity::Degenerate;
        rep.notes.push_back("parity comparison is a tie; classification degenerate");
        return rep;
    }
    rep.parity = rep.lhs < rep.rhs ? Parity::Even : Parity::Odd;

    if (rep.parity == Parity::Even) {
        // Certificate of no steady state: even parity plus
        // max{ 2 I1(0) (V_F + b_IE N_I(nbar)), b_EI b_IE / b_II, 2(V_F - V_R) } < b_EE,
        // where nbar is the largest fixed point of N = 2(V_F + b_IE N_I(N))/b_EE.
        try {
            const double n_i0 = solve_NI(0.0, net, pot, 1e-10);
            const double i1_at_zero = I1_eval(0.0, n_i0, net, pot);
            auto fixed_point_gap = [&](double n) {
                return 0.5 * net.b_EE * n - pot.V_F - net.b_IE * solve_NI(n, net, pot, 1e-10);
            };
            std::optional<double> nbar;
            double prev_x = 1e-4;
            double prev_g = fixed_point_gap(prev_x);
            for (int i = 1; i <= 160; ++i) {
                const double x = 1e-4 * std::pow(1e7 / 1e-4, i / 160.0);
                const double gx = fixed_point_gap(x);
                if ((prev_g <= 0.0) && (gx > 0.0)) {
                    double lo = prev_x, hi = x;
                    for (int it = 0; it < 80; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (fixed_point_gap(mid) > 0.0 ? hi : lo) = mid;
                    }
                    nbar = 0.5 * (lo + hi);
                }
                prev_x = x;
                prev_g = gx;
            }
            if (nbar) {
                const double n_i_bar = solve_NI(*nbar, net, pot, 1e-10);
                const double cand = std::max({2.0 * i1_at_zero * (pot.V_F + net.b_IE * n_i_bar),
                                              net.b_II > 0.0
                                                  ? net.b_EI * net.b_IE / net.b_II
                                                  : std::numeric_limits<double>::infinity(),
                                              2.0 * vfr});
                rep.no_steady_state_certified = cand < net.b_EE;
            } else {
                rep.notes.push_back("no fixed point for the no-steady-state certificate scan");
            }
        } catch (const Error& e) {
            rep.notes.push_back(std::string("no-steady-state certificate skipped: ") + e.what());
        }

        // Certificate of at least two steady states: even parity plus
        // 2 a_E b_EE < (V_R + b_IE N_I(2 a_E/(V_F - V_R)^2)) (V_F - V_R)^2.
        try {
            const double probe = 2.0 * net.a_E / (vfr * vfr);
            const double n_i_probe = solve_NI(probe, net, pot, 1e-10);
            rep.two_state_certified =
                2.0 * net.a_E * net.b_EE < (pot.V_R + net.b_IE * n_i_probe) * vfr * vfr;
        } catch (const Error& e) {
            rep.notes.push_back(std::string("two-state certificate skipped: ") + e.what());
        }
    }
    return rep;
}

enum class SweepParam { b_EE, b_IE, b_EI, b_II };

inline const char* sweep_param_name(SweepParam p) {
    switch (p) {
        case SweepParam::b_EE: return "b_EE";
        case SweepParam::b_IE: return "b_IE";
        case SweepParam::b_EI: return "b_EI";
        default: return "b_II";
    }
}

inline std::optional<SweepParam> sweep_param_from_name(const std::string& name) {
    if (name == "b_EE") return SweepParam::b_EE;
    if (name == "b_IE") return SweepParam::b_IE;
    if (name == "b_EI") return SweepParam::b_EI;
    if (name == "b_II") return SweepParam::b_II;
    return std::nullopt;
}

inline void set_sweep_param(NetworkParams& net, SweepParam p, double value) {
    switch (p) {
        case SweepParam::b_EE: net.b_EE = value; break;
        case SweepParam::b_IE: net.b_IE = value; break;
        case SweepParam::b_EI: net.b_EI = value; break;
        case SweepParam::b_II: net.b_II = value; break;
    }
}

struct SweepRow {
    double value = 0.0;
    FindResult found;
    std::optional<RegimeReport> regime;
    std::string error; ///< nonempty when this value failed; other rows proceed
};

/// Evaluate find_steady_states and classify_regime across parameter values.
/// Rows are keyed by index, so results are identical for any worker count.
inline std::vector<SweepRow> bifurcation_sweep(const NetworkParams& net_template,
                                               const PotentialParams& pot, SweepParam param,
                                               const std::vector<double>& values,
                                               const ScanOptions& scan = {},
                                               const Grid* grid = nullptr,
                                               unsigned workers = 1) {
    std::vector<SweepRow> rows(values.size());
    auto eval_one = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = values[i];
        try {
            NetworkParams net = net_template;
            set_sweep_param(net, param, values[i]);
            row.found = find_steady_states(net, pot, scan, grid);
            row.regime = classify_regime(net, pot);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) eval_one(i);
        return rows;
    }
    std::size_t next = 0;
    while (next < values.size()) {
        const std::size_t batch = std::min<std::size_t>(workers, values.size() - next);
        std::vector<std::future<void>> fs;
        fs.reserve(batch);
        for (std::size_t k = 0; k < batch; ++k)
            fs.push_back(std::async(std::launch::async, eval_one, next + k));
        for (auto& f : fs) f.get();
        next += batch;
    }
    return rows;
}

} // namespace nnlif
