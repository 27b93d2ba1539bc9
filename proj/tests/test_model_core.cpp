#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nnlif/coefficients.hpp"
#include "nnlif/density.hpp"
#include "nnlif/grid.hpp"
#include "nnlif/profiles.hpp"

using namespace nnlif;

TEST_CASE("grid snaps reset and threshold onto nodes") {
    const PotentialParams pot{2.0, 1.0};
    const Grid g(-4.0, pot, 800);

    REQUIRE(g.M >= 800);
    REQUIRE(g.V_min <= -4.0 + 1e-12);
    REQUIRE(g.node(g.j_R) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(g.node(g.M) == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(g.dv == Catch::Approx((g.V_F - g.V_min) / static_cast<double>(g.M)).epsilon(1e-14));

    SECTION("irrational-ratio request still lands exactly") {
        const Grid g2(-3.7156, pot, 513);
        REQUIRE(g2.node(g2.j_R) == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(g2.V_min <= -3.7156 + 1e-12);
        REQUIRE(g2.M >= 513);
    }

    SECTION("validation") {
        REQUIRE_THROWS_AS(Grid(1.5, pot, 800), ValidationError);
        REQUIRE_THROWS_AS(Grid(-4.0, pot, 4), ValidationError);
        REQUIRE_THROWS_AS(Grid(-4.0, PotentialParams{1.0, 2.0}, 800), ValidationError);
    }
}

TEST_CASE("trapezoid weights sum to the domain length") {
    const Grid g(-4.0, PotentialParams{}, 120);
    double total = 0.0;
    for (std::size_t j = 0; j <= g.M; ++j) total += g.weight(j);
    REQUIRE(total == Catch::Approx(g.V_F - g.V_min).epsilon(1e-13));
}

TEST_CASE("drift coefficient") {
    NetworkParams net;
    net.b_EE = 3.0;
    net.b_IE = 0.75;
    net.b_EI = 0.5;
    net.b_II = 0.25;
    const FiringRates r21{2.0, 1.0};
    const FiringRates r11{1.0, 1.0};

    REQUIRE(drift_coefficient(Population::E, 0.0, r21, net) == Catch::Approx(5.25));
    REQUIRE(drift_coefficient(Population::I, 0.5, r11, net) == Catch::Approx(-0.25));

    SECTION("external input cancels for E and is relative for I") {
        NetworkParams with_ext = net;
        with_ext.nu_ext = 2.0;
        REQUIRE(drift_coefficient(Population::E, 0.3, r11, with_ext) ==
                Catch::Approx(drift_coefficient(Population::E, 0.3, r11, net)));
        REQUIRE(drift_coefficient(Population::I, 0.3, r11, with_ext) ==
                Catch::Approx(drift_coefficient(Population::I, 0.3, r11, net) +
                              (net.b_EI - net.b_EE) * 2.0));
    }

    SECTION("drift is affine with slope -1 in v") {
        const double h0 = drift_coefficient(Population::E, 0.0, r21, net);
        const double h1 = drift_coefficient(Population::E, 1.3, r21, net);
        REQUIRE(h1 - h0 == Catch::Approx(-1.3).epsilon(1e-14));
    }
}

TEST_CASE("diffusion coefficient") {
    NetworkParams net;
    net.a_E = 1.0;
    net.a_I = 0.7;
    const FiringRates r{2.0, 1.0};

    REQUIRE(diffusion_coefficient(Population::E, r, net) == Catch::Approx(1.0));
    REQUIRE(diffusion_coefficient(Population::I, r, net) == Catch::Approx(0.7));

    SECTION("rate dependent mode") {
        NetworkParams rd = net;
        rd.diffusion = DiffusionMode::RateDependent;
        rd.d_EE = 1.0;
        rd.d_IE = 0.5;
        REQUIRE(diffusion_coefficient(Population::E, r, rd) == Catch::Approx(2.5));
        REQUIRE_THROWS_AS(diffusion_coefficient(Population::I, r, rd), NonpositiveDiffusion);
    }
}

TEST_CASE("maxwellian initial data") {
    const Grid g(-4.0, PotentialParams{}, 800);

    const auto rho = maxwellian_initial(Population::E, g, 0.0, 0.5);
    REQUIRE(trapezoid_mass(rho, g) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rho.values[g.M] == 0.0);
    REQUIRE(min_value(rho) >= 0.0);

    SECTION("peak sits at the requested centre") {
        std::size_t arg_max = 0;
        for (std::size_t j = 0; j <= g.M; ++j)
            if (rho.values[j] > rho.values[arg_max]) arg_max = j;
        REQUIRE(std::abs(g.node(arg_max)) <= g.dv);
    }

    SECTION("narrow bump near threshold keeps mass 1") {
        const auto sharp = maxwellian_initial(Population::E, g, 1.83, 0.003);
        REQUIRE(trapezoid_mass(sharp, g) == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(sharp.values[g.M] == 0.0);
    }

    SECTION("degenerate and invalid input") {
        REQUIRE_THROWS_AS(maxwellian_initial(Population::E, g, -90.0, 0.5), DegenerateProfile);
        REQUIRE_THROWS_AS(maxwellian_initial(Population::E, g, 0.0, 0.0), ValidationError);
        REQUIRE_THROWS_AS(maxwellian_initial(Population::E, g, 0.0, -1.0), ValidationError);
    }
}

TEST_CASE("stationary profile shape") {
    NetworkParams net;
    net.b_EE = 0.5;
    net.b_IE = 0.25;
    const PotentialParams pot{};
    const FiringRates rates{0.8, 0.6};
    const Grid g(-4.0, pot, 3200);

    const auto rho = stationary_profile(Population::E, g, rates, net);
    const double a = diffusion_coefficient(Population::E, rates, net);
    const double v0 = mean_input_potential(Population::E, rates, net);

    REQUIRE(rho.values[g.M] == 0.0);
    REQUIRE(min_value(rho) >= 0.0);

    SECTION("gaussian decay below the reset") {
        // For v <= V_R the profile is proportional to exp(-(v-V0)^2/(2a)).
        const std::size_t j1 = g.j_R / 2;
        const std::size_t j2 = g.j_R / 4;
        const double v1 = g.node(j1);
        const double v2 = g.node(j2);
        const double expected =
            std::exp((-(v1 - v0) * (v1 - v0) + (v2 - v0) * (v2 - v0)) / (2.0 * a));
        REQUIRE(rho.values[j1] / rho.values[j2] == Catch::Approx(expected).epsilon(1e-8));
    }

    SECTION("slope kink at the reset equals -N/a") {
        auto slope_right = [&](std::size_t j) {
            return (-3.0 * rho.values[j] + 4.0 * rho.values[j + 1] - rho.values[j + 2]) /
                   (2.0 * g.dv);
        };
        auto slope_left = [&](std::size_t j) {
            return (3.0 * rho.values[j] - 4.0 * rho.values[j - 1] + rho.values[j - 2]) /
                   (2.0 * g.dv);
        };
        const double jump = slope_right(g.j_R) - slope_left(g.j_R);
        REQUIRE(jump == Catch::Approx(-rates.N_E / a).epsilon(2e-3));
    }

    SECTION("rejects nonpositive rate") {
        REQUIRE_THROWS_AS(stationary_profile(Population::E, g, FiringRates{0.0, 0.5}, net),
                          DegenerateProfile);
    }
}
