#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "nnlif/profiles.hpp"
#include "nnlif/solver.hpp"
#include "nnlif/steady_state.hpp"
#include "nnlif/weno.hpp"

using namespace nnlif;

namespace {

NetworkParams caso2_one_net() {
    NetworkParams net;
    net.b_EE = 0.5;
    net.b_IE = 0.5;
    net.b_EI = 3.0;
    net.b_II = 0.5;
    return net;
}

/// Fifth-order linear interface value the nonlinear weights reduce to on
/// smooth data: (2 f_{i-2} - 13 f_{i-1} + 47 f_i + 27 f_{i+1} - 3 f_{i+2})/60.
double ideal_interface(double fm2, double fm1, double f0, double fp1, double fp2) {
    return (2.0 * fm2 - 13.0 * fm1 + 47.0 * f0 + 27.0 * fp1 - 3.0 * fp2) / 60.0;
}

} // namespace

TEST_CASE("interface reconstruction") {
    SECTION("constants reproduce exactly") {
        REQUIRE(weno::reconstruct(3.7, 3.7, 3.7, 3.7, 3.7) == Catch::Approx(3.7).epsilon(1e-15));
    }

    SECTION("linear data hit the midpoint value") {
        // f = 2v + 1 sampled at v = -2..2: interface at v = 0.5
        REQUIRE(weno::reconstruct(-3.0, -1.0, 1.0, 3.0, 5.0) ==
                Catch::Approx(2.0).epsilon(1e-14));
    }

    SECTION("quadratics collapse the weights onto the linear combination") {
        // all three smoothness indicators agree on any quadratic, so the
        // nonlinear weights equal the ideal ones and the output matches the
        // five-point formula to round-off
        auto f = [](double x) { return 1.5 * x * x - 0.7 * x + 0.2; };
        const double got = weno::reconstruct(f(-2), f(-1), f(0), f(1), f(2));
        REQUIRE(got ==
                Catch::Approx(ideal_interface(f(-2), f(-1), f(0), f(1), f(2))).epsilon(1e-13));
    }

    SECTION("smooth samples stay near the linear-weight value") {
        auto f = [](double x) { return std::exp(-x * x); };
        const double h = 0.05;
        const double got = weno::reconstruct(f(-2 * h), f(-h), f(0), f(h), f(2 * h));
        const double lin = ideal_interface(f(-2 * h), f(-h), f(0), f(h), f(2 * h));
        // the epsilon regularization of the weights leaves a small residual
        REQUIRE(std::abs(got - lin) < 1e-7);
    }
}

TEST_CASE("advection right-hand side converges at fifth order on smooth data") {
    // rho a Gaussian centered well inside the domain, drift h = -v; the exact
    // value of -(h rho)' is rho + v rho'.
    std::vector<double> errs;
    std::vector<double> dvs;
    for (std::size_t request : {160u, 320u, 640u}) {
        const Grid g(-6.0, PotentialParams{2.0, 1.0}, request);
        std::vector<double> rho(g.M + 1), h(g.M + 1), out(g.M + 1);
        for (std::size_t j = 0; j <= g.M; ++j) {
            const double v = g.node(j);
            rho[j] = std::exp(-(v + 2.0) * (v + 2.0) / 0.5);
            h[j] = -v;
        }
        weno::Workspace ws;
        ws.resize(g.M);
        weno::advection_rhs(g, rho, h, ws, out);
        double err = 0.0;
        for (std::size_t j = 0; j <= g.M; ++j) {
            const double v = g.node(j);
            const double exact = rho[j] + v * (-(v + 2.0) / 0.25) * rho[j];
            err = std::max(err, std::abs(out[j] - exact));
        }
        errs.push_back(err);
        dvs.push_back(g.dv);
    }
    REQUIRE(errs[0] == Catch::Approx(1.693e-4).epsilon(0.05));
    REQUIRE(errs[2] == Catch::Approx(1.696e-7).epsilon(0.05));
    for (std::size_t k = 1; k < errs.size(); ++k) {
        const double order = std::log(errs[k - 1] / errs[k]) / std::log(dvs[k - 1] / dvs[k]);
        REQUIRE(order >= 4.5);
        REQUIRE(order <= 5.6);
    }
}

TEST_CASE("scalar SSP-RK3 stage combination") {
    SECTION("integrates f = t exactly through the stage times") {
        const double dt = 0.2;
        const double u1 = ssp_rk3_scalar(1.0, 0.0, dt, [](double, double t) { return t; });
        REQUIRE(u1 == Catch::Approx(1.0 + 0.5 * dt * dt).epsilon(1e-15));
    }

    SECTION("local error on exponential decay is z^4/24") {
        const double dt = 0.01;
        const double u1 = ssp_rk3_scalar(1.0, 0.0, dt, [](double u, double) { return -2.0 * u; });
        const double z = -2.0 * dt;
        REQUIRE(std::abs(u1 - std::exp(z)) ==
                Catch::Approx(std::pow(z, 4) / 24.0).epsilon(0.02));
    }

    SECTION("global order three") {
        double prev_err = 0.0;
        for (int n : {40, 80, 160}) {
            const double dt = 1.0 / n;
            double u = 1.0, t = 0.0;
            for (int i = 0; i < n; ++i) {
                u = ssp_rk3_scalar(u, t, dt, [](double x, double) { return -2.0 * x; });
                t += dt;
            }
            const double err = std::abs(u - std::exp(-2.0));
            if (prev_err > 0.0) {
                const double order = std::log2(prev_err / err);
                REQUIRE(order > 2.9);
                REQUIRE(order < 3.1);
            }
            prev_err = err;
        }
    }
}

TEST_CASE("CFL timestep") {
    const PotentialParams pot;
    NetworkParams quiet; // all couplings zero, unit diffusion
    quiet.b_EE = quiet.b_IE = quiet.b_EI = quiet.b_II = 0.0;

    SECTION("diffusion-limited value on the unit grid") {
        const Grid g(-6.0, pot, 800); // dv = 0.01 exactly
        // max |h| = 6 gives dv/|h| = 1.67e-3; dv^2/(2a) = 5e-5 wins
        REQUIRE(cfl_dt(FiringRates{0.0, 0.0}, quiet, g, 0.4) ==
                Catch::Approx(2e-5).epsilon(1e-12));
    }

    SECTION("quarters under mesh doubling in the diffusion-limited regime") {
        const Grid g1(-6.0, pot, 800);
        const Grid g2(-6.0, pot, 1600);
        const double r = cfl_dt(FiringRates{0.0, 0.0}, quiet, g2, 0.4) /
                         cfl_dt(FiringRates{0.0, 0.0}, quiet, g1, 0.4);
        REQUIRE(r == Catch::Approx(0.25).epsilon(0.01));
    }

    SECTION("collapses below the floor at divergent rates") {
        const Grid g(-6.0, pot, 800);
        NetworkParams net = caso2_one_net();
        net.b_EE = 3.0;
        REQUIRE_THROWS_AS(cfl_dt(FiringRates{1e9, 0.0}, net, g, 0.4), TimestepCollapse);
    }
}

TEST_CASE("coupled right-hand side") {
    const PotentialParams pot;

    SECTION("vanishes on the zero state") {
        const Grid g(-6.5, pot, 200);
        NetworkState zero;
        zero.rho_E.values.assign(g.M + 1, 0.0);
        zero.rho_I.values.assign(g.M + 1, 0.0);
        const CoupledRhs k = coupled_rhs(zero, caso2_one_net(), g);
        REQUIRE(k.rates.N_E == 0.0);
        REQUIRE(k.rates.N_I == 0.0);
        for (std::size_t j = 0; j <= g.M; ++j) {
            REQUIRE(k.rhs_E[j] == 0.0);
            REQUIRE(k.rhs_I[j] == 0.0);
        }
    }

    SECTION("steady-profile residual: pointwise at the kink, integral at second order") {
        const NetworkParams net = caso2_one_net();
        double prev_away = 0.0;
        double prev_mass = 0.0;
        for (std::size_t request : {400u, 800u}) {
            const Grid g(-6.5, pot, request);
            const auto found = find_steady_states(net, pot, {}, &g);
            REQUIRE(found.states.size() == 1);
            NetworkState st;
            st.rho_E = found.states.front().profile_E;
            st.rho_I = found.states.front().profile_I;
            const CoupledRhs k = coupled_rhs(st, net, g);

            double kink = 0.0, away = 0.0, mass = 0.0;
            for (std::size_t j = 0; j <= g.M; ++j) {
                const double d = std::abs(k.rhs_E[j]);
                if (std::abs(g.node(j) - g.V_R) < 0.25)
                    kink = std::max(kink, d);
                else
                    away = std::max(away, d);
                mass += g.weight(j) * k.rhs_E[j];
            }
            // the stationary profile has a genuine derivative jump at the
            // reset node; the pointwise residual there stays O(1)
            REQUIRE(kink < 0.15);
            REQUIRE(away < 0.05);
            if (prev_away > 0.0) REQUIRE(away < prev_away);
            // ... but the residual carries no mass beyond O(dv^2)
            REQUIRE(std::abs(mass) < 4e-5);
            if (prev_mass > 0.0) {
                REQUIRE(prev_mass / std::abs(mass) > 3.0);
                REQUIRE(prev_mass / std::abs(mass) < 6.0);
            }
            prev_away = away;
            prev_mass = std::abs(mass);
        }
        REQUIRE(prev_mass < 8e-6);
    }
}

TEST_CASE("one RK3 step preserves a steady profile to step accuracy") {
    const PotentialParams pot;
    const NetworkParams net = caso2_one_net();
    const Grid g(-6.5, pot, 800);
    const auto found = find_steady_states(net, pot, {}, &g);
    NetworkState st;
    st.rho_E = found.states.front().profile_E;
    st.rho_I = found.states.front().profile_I;
    st.rates = FiringRates{found.states.front().N_E, found.states.front().N_I};

    const double dt = cfl_dt(st.rates, net, g, 0.4);
    const NetworkState next = rk3_step(st, dt, net, g);

    REQUIRE(next.t == Catch::Approx(dt));
    REQUIRE(max_norm_diff(next.rho_E.values, st.rho_E.values) < 1e-5);
    const double dm = std::abs(trapezoid_mass(next.rho_E, g) - trapezoid_mass(st.rho_E, g));
    REQUIRE(dm < 1e-8); // per-step mass drift on resolved data
    REQUIRE(next.rates.N_E == Catch::Approx(found.states.front().N_E).margin(1e-3));
}

TEST_CASE("exponential moment and the divergence certificate") {
    const PotentialParams pot;

    SECTION("trapezoidal moment of a flat profile") {
        const Grid g(-6.0, pot, 800);
        std::vector<double> flat(g.M + 1, 0.125);
        const double exact = 0.125 * (std::exp(2.0) - std::exp(-6.0));
        REQUIRE(exponential_moment(flat, 1.0, g) == Catch::Approx(exact).epsilon(1e-4));
        REQUIRE(exponential_moment(flat, 0.0, g) == Catch::Approx(1.0).epsilon(1e-12));
    }

    SECTION("concentrated data near threshold satisfy the certificate") {
        const Grid g(-6.5, pot, 800);
        NetworkParams net;
        net.b_EE = 0.5;
        net.b_IE = 0.25;
        net.b_EI = 0.25;
        net.b_II = 1.0;
        const auto rho0 = maxwellian_initial(Population::E, g, 1.83, 0.003);
        const auto cert = blowup_certificate(rho0, net, g);
        REQUIRE(cert.mu_used == Catch::Approx(4.0));
        REQUIRE(cert.M_mu0 > 1.5e3);
        REQUIRE(cert.M_mu0 < 1.6e3);
        REQUIRE(cert.satisfied);
    }

    SECTION("mass far from threshold does not") {
        const Grid g(-6.5, pot, 800);
        NetworkParams net;
        net.b_EE = 0.5;
        net.b_IE = 0.25;
        net.b_EI = 0.25;
        net.b_II = 1.0;
        const auto rho0 = maxwellian_initial(Population::E, g, -2.0, 0.25);
        const auto cert = blowup_certificate(rho0, net, g);
        REQUIRE_FALSE(cert.satisfied);
    }

    SECTION("override and validation") {
        const Grid g(-6.5, pot, 200);
        NetworkParams net;
        net.b_EE = 0.5;
        net.b_IE = 0.25;
        net.b_EI = 0.25;
        net.b_II = 1.0;
        const auto rho0 = maxwellian_initial(Population::E, g, 0.0, 0.5);
        REQUIRE(blowup_certificate(rho0, net, g, 1.0).mu_used == 1.0);
        net.b_EE = 0.0;
        REQUIRE_THROWS_AS(blowup_certificate(rho0, net, g), ValidationError);
    }
}

TEST_CASE("simulation runs") {
    const PotentialParams pot;
    const Grid g(-6.5, pot, 200);
    NetworkParams net;
    net.b_EE = net.b_IE = net.b_EI = net.b_II = 0.1;
    const auto rho0 = maxwellian_initial(Population::E, g, -1.0, 0.5);

    SECTION("completes and records a well-formed series") {
        SolverConfig cfg;
        cfg.t_end = 0.2;
        cfg.tol_mass = 1e-3;
        const RunOutcome out = run_simulation(rho0, rho0, net, g, cfg);
        REQUIRE(out.status == RunStatus::Completed);
        REQUIRE(out.t_stop == Catch::Approx(0.2).epsilon(1e-9));
        REQUIRE(out.steps > 0);
        REQUIRE(out.series.size() >= 2);
        REQUIRE(out.series.front().t == 0.0);
        REQUIRE(out.series.back().t == Catch::Approx(0.2).epsilon(1e-9));
        for (const auto& row : out.series) {
            REQUIRE(std::abs(row.mass_E - 1.0) < 1e-3);
            REQUIRE(row.N_E >= 0.0);
            REQUIRE(row.M_mu.has_value()); // b_EE > 0 fixes a default exponent
        }
        REQUIRE(out.series.size() <= out.steps / cfg.record_every + 3);
    }

    SECTION("an unmeetable mass gate trips the invariant check") {
        SolverConfig cfg;
        cfg.t_end = 0.2;
        cfg.tol_mass = 1e-12;
        REQUIRE_THROWS_AS(run_simulation(rho0, rho0, net, g, cfg), InvariantViolation);
    }

    SECTION("mismatched grid is rejected") {
        SolverConfig cfg;
        PopulationDensity bad = rho0;
        bad.values.pop_back();
        REQUIRE_THROWS_AS(run_simulation(bad, rho0, net, g, cfg), ValidationError);
    }
}

TEST_CASE("population lanes are independent exactly when uncoupled") {
    const PotentialParams pot;
    const Grid g(-6.5, pot, 400);
    NetworkParams net;
    net.b_EE = 0.2;
    net.b_IE = 0.0;
    net.b_EI = 0.0;
    net.b_II = 0.2;
    SolverConfig cfg;
    cfg.t_end = 0.05;
    cfg.tol_mass = 1e-3;

    const auto rho_E0 = maxwellian_initial(Population::E, g, 0.0, 0.25);
    const auto rho_I0a = maxwellian_initial(Population::I, g, 0.0, 0.25);
    const auto rho_I0b = maxwellian_initial(Population::I, g, -1.0, 0.5);

    const RunOutcome a = run_simulation(rho_E0, rho_I0a, net, g, cfg);
    const RunOutcome b = run_simulation(rho_E0, rho_I0b, net, g, cfg);
    REQUIRE(a.steps == b.steps);
    REQUIRE(std::memcmp(a.final_state.rho_E.values.data(), b.final_state.rho_E.values.data(),
                        (g.M + 1) * sizeof(double)) == 0);
    REQUIRE(max_norm_diff(a.final_state.rho_I.values, b.final_state.rho_I.values) > 1e-3);
}

TEST_CASE("parallel lanes reproduce serial bits") {
    const PotentialParams pot;
    const Grid g(-6.5, pot, 200);
    NetworkParams net;
    net.b_EE = 0.5;
    net.b_IE = 0.5;
    net.b_EI = 3.0;
    net.b_II = 0.5;
    const auto rho0 = maxwellian_initial(Population::E, g, -1.0, 0.5);

    SolverConfig serial;
    serial.t_end = 0.05;
    serial.tol_mass = 1e-3;
    SolverConfig parallel = serial;
    parallel.workers = 2;

    const RunOutcome a = run_simulation(rho0, rho0, net, g, serial);
    const RunOutcome b = run_simulation(rho0, rho0, net, g, parallel);
    REQUIRE(std::memcmp(a.final_state.rho_E.values.data(), b.final_state.rho_E.values.data(),
                        (g.M + 1) * sizeof(double)) == 0);
    REQUIRE(std::memcmp(a.final_state.rho_I.values.data(), b.final_state.rho_I.values.data(),
                        (g.M + 1) * sizeof(double)) == 0);
}
