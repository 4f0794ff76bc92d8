#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "beclab/neumann.hpp"
#include "beclab/radial.hpp"
#include "beclab/regime.hpp"
#include "beclab/scattering.hpp"

using namespace beclab;

TEST_CASE("constant potential matches the closed-form tanh scattering length") {
    // m(r) = sqrt(mu/v0) sinh(sqrt(v0/mu) r) / cosh(sqrt(v0/mu) R0)
    for (double v0 : {1.0, 5.0}) {
        for (double mu : {1.0, 1e-2, 1e-4}) {
            const auto v = RadialPotential::constant(v0, 1.0);
            const auto sol = solve_dirichlet(v, mu, 0.5 * default_scattering_step(v, mu));
            const double exact = constant_potential_a0(v0, 1.0, mu);
            CHECK(std::fabs(sol.a0 - exact) < 1e-8);
        }
    }
}

TEST_CASE("unit constant potential at mu = 1 gives 1 - tanh(1)") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    const auto sol = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0));
    CHECK(sol.a0 == Catch::Approx(1.0 - std::tanh(1.0)).margin(1e-8));
}

TEST_CASE("deep semiclassical constant potential: a0 ~ 1 - sqrt(mu)") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    const auto sol = solve_dirichlet(v, 1e-4, default_scattering_step(v, 1e-4));
    CHECK(sol.a0 == Catch::Approx(1.0 - 1e-2).epsilon(1e-6));
}

TEST_CASE("zero potential is free: a0 = 0, f = 1, m = r") {
    const auto v = RadialPotential::zero(1.0);
    const auto sol = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0));
    CHECK(std::fabs(sol.a0) < 1e-14);
    for (std::size_t i = 0; i < sol.r_grid.size(); ++i) {
        CHECK(std::fabs(sol.f_values[i] - 1.0) < 1e-12);
        CHECK(std::fabs(sol.m_values[i] - sol.r_grid[i]) < 1e-12);
    }
    CHECK(scattering_length_by_integral(sol, v) == Catch::Approx(0.0).margin(1e-14));
    CHECK(b0_kinetic_fraction(sol, v) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("scattering length by integral agrees with the geometric value") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    const auto sol = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0));
    const double by_int = scattering_length_by_integral(sol, v);
    CHECK(std::fabs(by_int - (1.0 - std::tanh(1.0))) < 1e-6);
    CHECK(std::fabs(by_int - sol.a0) < 10.0 * sol.step * sol.step);
}

TEST_CASE("solution invariants hold across potentials and mu") {
    for (double n : {0.0, 1.0, 2.0}) {
        const auto v = n == 0.0 ? RadialPotential::constant(1.0, 1.0)
                                : RadialPotential::vanishing(1.0, 1.0, n);
        for (double mu : {1.0, 1e-2, 1e-4}) {
            const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu));
            INFO("n = " << n << ", mu = " << mu);
            // 0 < c1 <= f <= 1, monotone nondecreasing
            CHECK(sol.c1 >= 0.0);
            CHECK(sol.c1 <= 1.0 + 1e-12);
            CHECK(sol.c1 >= std::exp(-std::sqrt(v.zeta0() / mu)) - 1e-15);
            for (std::size_t i = 0; i + 1 < sol.r_grid.size(); ++i) {
                CHECK(sol.f_values[i] <= sol.f_values[i + 1] + 1e-12);
                CHECK(sol.f_values[i] <= 1.0 + 1e-12);
            }
            // 0 <= a0 <= min(R0, (1/4pi mu) int v dx)
            CHECK(sol.a0 >= 0.0);
            CHECK(sol.a0 <= v.R0);
            std::vector<double> vr2(sol.i_R0 + 1);
            for (std::size_t i = 0; i <= sol.i_R0; ++i) {
                const double r = sol.r_grid[i];
                vr2[i] = v.amplitude_profile(std::min(r, v.R0)) * r * r;
            }
            CHECK(sol.a0 <= simpson_uniform(vr2, sol.step) / mu + 1e-10);
            // gradient bound |f'| <= a0 / r^2 at every node
            for (std::size_t i = 1; i < sol.r_grid.size(); ++i) {
                const double r = sol.r_grid[i];
                CHECK(sol.df_values[i] <= sol.a0 / (r * r) + 1e-9);
                CHECK(sol.df_values[i] >= -1e-12);
            }
            // tail linearity
            for (std::size_t i = sol.i_R0; i < sol.r_grid.size(); ++i)
                CHECK(std::fabs(sol.m_values[i] - (sol.r_grid[i] - sol.a0)) <=
                      10.0 * sol.step * sol.step);
            // dual a0 formula
            CHECK(std::fabs(scattering_length_by_integral(sol, v) - sol.a0) <=
                  10.0 * sol.step * sol.step);
        }
    }
}

TEST_CASE("raw integration continued past R0 stays linear") {
    // independent one-shot integration across the support boundary; v is C^1
    // there for n = 2, so no piecewise handling is needed
    const auto v = RadialPotential::vanishing(2.0, 1.0, 2.0);
    const double mu = 0.5;
    const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu), 3.0);
    const auto q = [&](double r) { return r < 1.0 ? v.amplitude_profile(r) / mu : 0.0; };
    double m = 0.0, p = 1.0;
    const std::size_t steps = 6000;
    const double h = 3.0 / steps;
    for (std::size_t i = 0; i < steps; ++i)
        detail::rk4_step(h * static_cast<double>(i), h, q, m, p);
    const double a0_cont = 3.0 - m / p;
    CHECK(std::fabs(a0_cont - sol.a0) < 1e-8);
}

TEST_CASE("b0 dual formulas agree: a0 - int v m^2 / mu vs int f'^2 r^2 + tail") {
    for (double mu : {1.0, 1e-2}) {
        const auto v = RadialPotential::constant(1.0, 1.0);
        const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu));
        const double via_potential = b0_kinetic_fraction(sol, v);
        CHECK(std::fabs(via_potential - sol.b0) < 1e-6);
        CHECK(via_potential >= 0.0);
        CHECK(via_potential <= sol.a0 + 1e-12);
    }
}

TEST_CASE("hard-core direction: b0/a0 -> 1 as mu -> 0") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    double prev_ratio = 0.0;
    for (double mu : {1e-2, 1e-3, 1e-4}) {
        const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu));
        const double ratio = sol.b0 / sol.a0;
        CHECK(ratio > prev_ratio);
        prev_ratio = ratio;
    }
    CHECK(prev_ratio > 0.98);
    // a0 - b0 <= (a0/R0) eta(mu)
    const auto sol = solve_dirichlet(v, 1e-4, default_scattering_step(v, 1e-4));
    CHECK(sol.a0 - sol.b0 <= sol.a0 / 1.0 * (1.0 - sol.a0) + 1e-10);
}

TEST_CASE("capacity") {
    CHECK(capacity(RadialPotential::constant(1.0, 1.0)) == 1.0);
    CHECK(capacity(RadialPotential::constant(3.0, 2.5)) == 2.5);
    for (double n : {0.0, 1.0, 2.0})
        CHECK(capacity(n == 0.0 ? RadialPotential::constant(1.0, 1.0)
                                : RadialPotential::vanishing(1.0, 1.0, n)) == 1.0);
    CHECK_THROWS_AS(capacity(RadialPotential::zero(1.0)), InvalidPotential);
}

TEST_CASE("eta rate fit reproduces the 1/(n+2) exponent") {
    const auto family = [](double n) {
        return n == 0.0 ? RadialPotential::constant(1.0, 1.0)
                        : RadialPotential::vanishing(1.0, 1.0, n);
    };
    std::vector<double> mu_list;
    for (int k = 0; k <= 8; ++k) mu_list.push_back(std::pow(10.0, -2.0 - 0.5 * k));
    for (double n : {0.0, 1.0, 2.0}) {
        const auto fit = eta_rate_fit(family, n, mu_list);
        const double expected = 1.0 / (n + 2.0);
        INFO("n = " << n << " slope = " << fit.slope);
        CHECK(std::fabs(fit.slope - expected) <= 0.15 * expected);
    }
}

TEST_CASE("typed errors") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    CHECK_THROWS_AS(solve_dirichlet(v, -1.0, 1e-3), NonPositiveMu);
    CHECK_THROWS_AS(solve_dirichlet(v, 1.0, 0.1), StepTooCoarse);
    RadialPotential bad = v;
    bad.amplitude_profile = [](double r) { return r < 0.5 ? 1.0 : -1.0; };
    CHECK_THROWS_AS(solve_dirichlet(bad, 1.0, 1e-3), InvalidPotential);
    const auto increasing_eta = [&]() {
        return eta_rate_fit([](double) { return RadialPotential::constant(1.0, 1.0); }, 0.0,
                            {1e-6, 1e-4, 1e-2});  // increasing mu => eta increases
    };
    CHECK_THROWS_AS(increasing_eta(), NonMonotoneEta);
}

TEST_CASE("Neumann: zero potential has E_gs = 0 and f = 1") {
    const auto v = RadialPotential::zero(1.0);
    const auto gs = solve_neumann(v, 1.0, 10.0, default_scattering_step(v, 1.0), 1e-14);
    CHECK(gs.E_gs < 1e-12);
    for (std::size_t i = 1; i < gs.r_grid.size(); ++i)
        CHECK(std::fabs(gs.f_values[i] - 1.0) < 1e-9);
}

TEST_CASE("Neumann ground state against the transcendental matching oracle") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    for (double L : {10.0, 20.0}) {
        const auto gs = solve_neumann(v, 1.0, L, default_scattering_step(v, 1.0), 1e-13);
        const double exact = constant_neumann_ground_energy(1.0, 1.0, 1.0, L);
        INFO("L = " << L);
        CHECK(gs.E_gs == Catch::Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("Neumann asymptotics and boundary conditions") {
    // E_gs L^3 / (3 mu a0) = 1 + 3 a0/(2L) + O(L^-2): the upper bound holds
    // with its O(R0/L) factor and the inverse ratio climbs to 1 from below
    const auto v = RadialPotential::constant(1.0, 1.0);
    const double a0 = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0)).a0;
    double prev_inv = 0.0;
    for (double L : {10.0, 20.0, 40.0}) {
        const auto gs = solve_neumann(v, 1.0, L, default_scattering_step(v, 1.0), 1e-14);
        // boundary conditions in m-form
        CHECK(std::fabs(gs.m_values.back() - L) < 1e-9);
        CHECK(std::fabs(gs.df_values.back()) < 1e-7);
        const double inv = 3.0 * 1.0 * a0 / (gs.E_gs * L * L * L);
        INFO("L = " << L << " inverse ratio = " << inv);
        CHECK(inv > 0.8);
        CHECK(inv <= 1.0);
        CHECK(inv > prev_inv);
        prev_inv = inv;
        // E_gs <= (3 mu a0 / L^3)(1 + C R0 / L) with a generous C
        CHECK(gs.E_gs <= 3.0 * a0 / (L * L * L) * (1.0 + 5.0 / L));
        // leading L-correction matches 1 + 3 a0 / (2 L) within 30%
        const double excess = gs.E_gs * L * L * L / (3.0 * a0) - 1.0;
        CHECK(std::fabs(excess - 1.5 * a0 / L) < 0.3 * 1.5 * a0 / L);
    }
}

TEST_CASE("comparison principle: f0 <= f_L <= f0 + C a0 / L") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    for (double mu : {1.0, 0.1}) {
        const double step = default_scattering_step(v, mu);
        const auto sol = solve_dirichlet(v, mu, step);
        for (double L : {10.0, 20.0}) {
            const auto gs = solve_neumann(v, mu, L, step, 1e-14);
            double max_gap = 0.0;
            for (std::size_t i = 0; i < gs.r_grid.size(); ++i) {
                const double f0 = sol.f_at(gs.r_grid[i]);
                CHECK(f0 <= gs.f_values[i] + 1e-7);
                max_gap = std::max(max_gap, gs.f_values[i] - f0);
            }
            INFO("mu = " << mu << " L = " << L);
            CHECK(max_gap <= 5.0 * sol.a0 / L);
        }
    }
}

TEST_CASE("potential moments of the Neumann state") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    const double mu = 1.0, L = 20.0;
    const double step = default_scattering_step(v, mu);
    const auto sol = solve_dirichlet(v, mu, step);
    const auto gs = solve_neumann(v, mu, L, step, 1e-14);
    const double m1 = potential_moment(gs, v, 1);
    CHECK(std::fabs(m1 - 4.0 * M_PI * mu * sol.a0) <= 5.0 * sol.a0 / L);
    const double m2 = potential_moment(gs, v, 2);
    const double m2_dirichlet = 4.0 * M_PI * mu * (sol.a0 - b0_kinetic_fraction(sol, v));
    CHECK(std::fabs(m2 - m2_dirichlet) <= 10.0 * mu * sol.a0 / L);
    // and the O(mu a0 / L) rate is genuine: the scaled gap is stable in L
    const auto gs2 = solve_neumann(v, mu, 2.0 * L, step, 1e-14);
    const double gap_L = std::fabs(m2 - m2_dirichlet) * L;
    const double gap_2L = std::fabs(potential_moment(gs2, v, 2) - m2_dirichlet) * 2.0 * L;
    CHECK(std::fabs(gap_2L - gap_L) < 0.5 * gap_L);
}

TEST_CASE("FD matrix eigensolver and FD recurrence locate the same discrete E") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    for (double L : {10.0, 20.0, 40.0}) {
        const auto M = static_cast<std::size_t>(L * 200);
        const double e_matrix = fd::neumann_matrix_ground_energy(v, 1.0, L, M);
        const double e_rec = fd::neumann_recurrence_ground_energy(v, 1.0, L, M);
        INFO("L = " << L);
        CHECK(std::fabs(e_matrix - e_rec) / e_matrix < 1e-6);
        // and both approximate the continuum shooting value at O(h^2)
        const auto gs = solve_neumann(v, 1.0, L, default_scattering_step(v, 1.0), 1e-14);
        CHECK(std::fabs(e_matrix - gs.E_gs) / gs.E_gs < 1e-2);
    }
}

TEST_CASE("FD Dirichlet brute force reproduces a0 at O(h^2)") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    const double a0_shoot = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0)).a0;
    const double e1 = std::fabs(fd::dirichlet_a0(v, 1.0, 400, 2.0) - a0_shoot);
    const double e2 = std::fabs(fd::dirichlet_a0(v, 1.0, 800, 2.0) - a0_shoot);
    CHECK(e1 < 1e-4);
    CHECK(e2 < e1 / 2.5);  // ~4x reduction expected at 2nd order
}

TEST_CASE("rescaled scattering data") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    SECTION("GP regime: N a_N eps^2 = a0 exactly") {
        RegimeParams p(64.0, 0.5, 1.0, 1.0, 0.0);
        CHECK(p.mu() == Catch::Approx(1.0));
        const auto sol = solve_dirichlet(v, p.mu(), default_scattering_step(v, p.mu()));
        const auto data = rescaled_scattering_data(p, sol, capacity(v));
        CHECK(data.N_aN_eps2 == Catch::Approx(sol.a0).epsilon(1e-14));
        CHECK(data.a_N == Catch::Approx(sol.a0 / (64.0 * 0.25)).epsilon(1e-14));
    }
    SECTION("HC regime: deviation equals eta(1/lambda)") {
        RegimeParams p(1e6, 0.3, 1.0, 1.0, 0.5);
        const auto sol = solve_dirichlet(v, p.mu(), default_scattering_step(v, p.mu()));
        const auto data = rescaled_scattering_data(p, sol, capacity(v));
        CHECK(data.deviation == Catch::Approx(1.0 - sol.a0).epsilon(1e-12));
    }
    SECTION("regime classifier") {
        CHECK(RegimeParams(64, 0.5, 1.0, 1.0, 0.0).regime() == Regime::GP);
        CHECK(RegimeParams(64, 0.5, 1.0, 1.0, 0.5).regime() == Regime::HC);
        CHECK(RegimeParams(64, 0.5, 1.0, 0.5, 0.0).regime() == Regime::BGP);
        CHECK(RegimeParams(64, 0.5, 1.0, 0.0, 0.0).regime() == Regime::SGP);
        CHECK(RegimeParams(64, 0.5, 1.5, 0.0, 0.0).regime() == Regime::HD);
    }
}
