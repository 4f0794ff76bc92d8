#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "beclab/diagnostics.hpp"

using namespace beclab;

namespace {

// shared 1D test data: rho = (1 + 0.2 cos x)/norm, S = 0.05 sin x
struct WkbData {
    Grid g{1, 1024, 2.0 * M_PI};
    double eps;
    WaveField field;
    FluidState fluid;

    explicit WkbData(double eps_, double c, double chi_amp = 0.0) : eps(eps_) {
        field = WaveField::from_function(g, eps, [&](double x, double, double) {
            const double rho = (1.0 + 0.2 * std::cos(x)) / (2.0 * M_PI);
            const double chi = 1.0 + chi_amp * eps_ * std::cos(2.0 * x);
            const double S = 0.05 * std::sin(x);
            return std::sqrt(rho) * chi * cplx(std::cos(S / eps_), std::sin(S / eps_));
        });
        field.normalize();
        fluid.grid = g;
        fluid.c = c;
        fluid.time = 0.0;
        fluid.rho.resize(g.size());
        fluid.u[0].resize(g.size());
        for (int i = 0; i < g.n; ++i) {
            const double x = g.coord(i);
            fluid.rho[i] = (1.0 + 0.2 * std::cos(x)) / (2.0 * M_PI);
            fluid.u[0][i] = 0.05 * std::cos(x);  // grad S
        }
    }
};

double grad_sqrt_rho_energy(const Grid& g, const std::vector<double>& rho) {
    std::vector<cplx> sq(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) sq[i] = std::sqrt(rho[i]);
    const auto d = spectral_derivative(g, sq, 0);
    double acc = 0.0;
    for (const auto& z : d) acc += std::norm(z);
    return acc * g.cell_volume();
}

} // namespace

TEST_CASE("modulated energy of matched WKB data is (eps^2/2) int |grad sqrt(rho)|^2") {
    const double c = 4.0 * M_PI * 0.2384;
    for (double eps : {0.2, 0.1, 0.05}) {
        WkbData d(eps, c);
        const auto kernel = delta_kernel(c);  // g = c exactly
        const double M = modulated_energy(d.field, d.fluid, kernel, c);
        const double expected = 0.5 * eps * eps * grad_sqrt_rho_energy(d.g, d.fluid.rho);
        INFO("eps = " << eps);
        CHECK(M == Catch::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("modulated energy initial slope is 2 in eps") {
    const double c = 3.0;
    std::vector<double> epss{0.2, 0.1, 0.05, 0.025}, Ms;
    for (double eps : epss) {
        WkbData d(eps, c);
        Ms.push_back(modulated_energy(d.field, d.fluid, delta_kernel(c), c));
    }
    const auto rep = fit_slope("eps", epss, Ms, 2.0);
    INFO("slope " << rep.fitted_slope);
    CHECK(std::fabs(rep.fitted_slope - 2.0) < 0.2);
}

TEST_CASE("real field with u = 0: M reduces to gradient + potential parts") {
    Grid g{1, 256, 2.0 * M_PI};
    const double eps = 0.3, c = 2.0;
    auto field = WaveField::from_function(g, eps, [&](double x, double, double) {
        return cplx(std::sqrt((1.0 + 0.2 * std::cos(x)) / (2.0 * M_PI)), 0.0);
    });
    field.normalize();
    FluidState fluid;
    fluid.grid = g;
    fluid.c = c;
    fluid.rho = field.density();
    fluid.u[0].assign(g.size(), 0.0);
    const double M = modulated_energy(field, fluid, delta_kernel(c), c);
    const double kin = 0.5 * eps * eps * grad_sqrt_rho_energy(g, fluid.rho);
    CHECK(M >= kin - 1e-12);
    CHECK(M == Catch::Approx(kin).margin(1e-10));  // potential defect vanishes at g = c
}

namespace {

GpTrajectory evolve_snapshots(const WaveField& f, const EffectiveKernel& k, double t_snap,
                              int n_snaps) {
    const double budget = gp_dt_budget(f, k);
    const auto sub = static_cast<int>(std::ceil(t_snap / (0.5 * budget)));
    const double dt = t_snap / sub;
    return evolve(f, k, dt, t_snap * n_snaps,
                  static_cast<int>(std::lround(1.0 / t_snap)));
}

EulerTrajectory evolve_euler_snapshots(const FluidState& s, double t_snap, int n_snaps) {
    const double cfl_dt = 0.25 / euler_cfl_number(s, 1.0);
    const auto sub = static_cast<int>(std::ceil(t_snap / cfl_dt));
    const double dt = t_snap / sub;
    return evolve_euler(s, dt, t_snap * n_snaps,
                        static_cast<int>(std::lround(1.0 / t_snap)));
}

} // namespace

TEST_CASE("gronwall check: modulated energy mechanism on a GP/Euler pair") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    const auto sol = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0));
    const double c = 4.0 * M_PI * sol.a0;
    const double t_snap = 0.05;
    const int n_snaps = 10;

    std::vector<double> epss{0.2, 0.1, 0.05};
    std::vector<double> C_fits, density_errs;
    for (double eps : epss) {
        WkbData d(eps, c, 0.3);
        RegimeParams params(1e15, eps, 1.0, 1.0, 0.0);
        const auto kernel = delta_kernel(params, sol);
        REQUIRE(kernel.g == Catch::Approx(c).epsilon(1e-12));  // GP: mu~ = 1
        const auto gp = evolve_snapshots(d.field, kernel, t_snap, n_snaps);
        const auto eu = evolve_euler_snapshots(d.fluid, t_snap, n_snaps);
        REQUIRE(gp.times.size() == eu.times.size());
        const auto rep =
            gronwall_check(gp, eu, kernel, c, params.lambda() / params.L(), 0.0);
        C_fits.push_back(rep.C_fit);
        density_errs.push_back(rep.density_L2_err.back());

        // M stays positive up to the coercivity defect, which vanishes at g = c
        for (std::size_t s = 0; s < rep.t_grid.size(); ++s) {
            CHECK(rep.M_kin[s] >= 0.0);
            CHECK(rep.coercivity_defect[s] < 1e-10);
            CHECK(rep.M_values[s] > -1e-12);
        }
        // density error bound with the fitted kappa
        for (std::size_t s = 0; s < rep.t_grid.size(); ++s)
            CHECK(rep.density_L2_err[s] * rep.density_L2_err[s] <=
                  rep.kappa_fit * rep.base + 1e-15);

        // triangle-inequality chains behind the momentum and kinetic error bounds
        for (std::size_t s = 0; s < gp.snapshots.size(); ++s) {
            const auto& field = gp.snapshots[s];
            const auto& fluid = eu.snapshots[s];
            const auto obs = observables(field, kernel);
            const Grid& g = field.grid;
            std::vector<double> mom_diff(g.size()), kin_diff(g.size()), rho_diff(g.size());
            const auto rho_eps = field.density();
            double cov_plus = 0.0, cov_minus = 0.0, u_l2 = 0.0, u_l4 = 0.0, phi_l2 = 0.0;
            const auto dphi = spectral_derivative(g, field.values, 0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const cplx grad_i = cplx(0.0, eps) * dphi[i];
                cov_plus += std::norm(grad_i + fluid.u[0][i] * field.values[i]);
                cov_minus += std::norm(grad_i - fluid.u[0][i] * field.values[i]);
                u_l2 += fluid.u[0][i] * fluid.u[0][i];
                u_l4 += std::pow(fluid.u[0][i], 4);
                phi_l2 += std::norm(field.values[i]);
                mom_diff[i] = std::fabs(obs.J[0][i] - fluid.rho[i] * fluid.u[0][i]);
                kin_diff[i] = std::fabs(2.0 * obs.e_kin[i] -
                                        fluid.rho[i] * fluid.u[0][i] * fluid.u[0][i]);
                rho_diff[i] = rho_eps[i] - fluid.rho[i];
            }
            const double h = g.cell_volume();
            cov_plus = std::sqrt(cov_plus * h);
            cov_minus = std::sqrt(cov_minus * h);
            u_l2 = std::sqrt(u_l2 * h);
            u_l4 = std::sqrt(std::sqrt(u_l4 * h));
            phi_l2 = std::sqrt(phi_l2 * h);
            const double rho_err = l2_norm_real(g, rho_diff);
            CHECK(l1_norm_real(g, mom_diff) <=
                  phi_l2 * cov_plus + u_l2 * rho_err + 1e-12);
            CHECK(l1_norm_real(g, kin_diff) <=
                  cov_plus * cov_minus + rho_err * u_l4 * u_l4 + 1e-12);
        }
    }
    // Gronwall constant stable (< 2x) across the sweep
    const double cmax = *std::max_element(C_fits.begin(), C_fits.end());
    const double cmin = *std::min_element(C_fits.begin(), C_fits.end());
    INFO("C_fits " << C_fits[0] << " " << C_fits[1] << " " << C_fits[2]);
    CHECK(cmax <= 2.0 * std::max(cmin, 1e-3));
    // density error at T decays ~ eps (slope 1)
    const auto rep = fit_slope("eps", epss, density_errs, 1.0, false);
    INFO("density error slope " << rep.fitted_slope);
    CHECK(std::fabs(rep.fitted_slope - 1.0) < 0.25);
}

TEST_CASE("HC-side coercivity defect is nonzero and eta-bounded") {
    // with c = 4 pi c0 but kernel coupling g = 4 pi mu~ a0(mu), the quadratic
    // form loses (c - g)/2 int rho_eps^2 with c - g = 4 pi eta(mu) at mu~ = 1
    const auto v = RadialPotential::constant(1.0, 1.0);
    const double c = 4.0 * M_PI * capacity(v);
    std::vector<double> defects, etas;
    for (double mu : {0.25, 0.0625}) {
        const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu));
        const double eta = capacity(v) - sol.a0;
        WkbData d(0.1, c);
        const auto kernel = delta_kernel(4.0 * M_PI * sol.a0);  // mu~ = 1 normalization
        const double M = modulated_energy(d.field, d.fluid, kernel, c);
        const double Mk = modulated_kinetic(d.field, d.fluid);
        const auto rho_eps = d.field.density();
        std::vector<double> diff(d.g.size());
        double rho2 = 0.0;
        for (std::size_t i = 0; i < d.g.size(); ++i) {
            diff[i] = rho_eps[i] - d.fluid.rho[i];
            rho2 += rho_eps[i] * rho_eps[i];
        }
        rho2 *= d.g.cell_volume();
        const double derr = l2_norm_real(d.g, diff);
        const double defect = std::max(0.0, 0.5 * Mk + 0.5 * c * derr * derr - M);
        // exact algebra: defect = (c - g)/2 int rho_eps^2 + Mk/2 slack
        CHECK(defect > 0.0);
        CHECK(defect <= 0.5 * 4.0 * M_PI * eta * rho2 * (1.0 + 1e-9));
        defects.push_back(defect);
        etas.push_back(eta);
    }
    // the defect shrinks with eta(mu), i.e. with the kernel-to-delta error
    CHECK(defects[1] < defects[0]);
    CHECK(defects[1] / defects[0] == Catch::Approx(etas[1] / etas[0]).epsilon(0.2));
}

TEST_CASE("desynced trajectories are rejected") {
    WkbData d(0.2, 1.0);
    const auto kernel = delta_kernel(1.0);
    const auto gp = evolve_snapshots(d.field, kernel, 0.05, 2);
    auto eu = evolve_euler_snapshots(d.fluid, 0.05, 2);
    eu.times.back() += 0.01;
    CHECK_THROWS_AS(gronwall_check(gp, eu, kernel, 1.0, 0.0, 0.0),
                    DesyncedTrajectories);
}

TEST_CASE("WKB amplitude error: SGP regime has slope ~1 in eps") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    WkbSetup setup;
    setup.grid = Grid{1, 512, 2.0 * M_PI};
    Grid g = setup.grid;
    std::vector<cplx> a(g.size());
    for (int i = 0; i < g.n; ++i) a[i] = 1.0 + 0.1 * std::cos(g.coord(i));
    double norm = 0.0;
    for (const auto& z : a) norm += std::norm(z);
    norm = std::sqrt(norm * g.cell_volume());
    for (auto& z : a) z /= norm;
    setup.a_in = amplitude_from_grid(g, a);
    std::vector<double> phi(g.size());
    for (int i = 0; i < g.n; ++i) phi[i] = 0.5 * std::sin(g.coord(i));
    setup.phase = grid_phase(g, phi);
    setup.c0 = 0.0;
    setup.T = 0.5;
    setup.s = 2.0;

    std::vector<RegimeParams> ps;
    std::vector<double> epss{0.2, 0.1, 0.05, 0.025};
    for (double eps : epss) ps.emplace_back(1e12, eps, 1.0, 0.0, 0.0);
    const auto rep = wkb_error_sweep(ps, epss, v, setup, "eps", 1.0);
    INFO("SGP slope " << rep.fitted_slope);
    CHECK(std::fabs(rep.fitted_slope - 1.0) <= 0.25);
}

TEST_CASE("energy density split across the GP -> HC sweep") {
    const auto v = RadialPotential::constant(1.0, 1.0);
    Grid g{1, 256, 2.0 * M_PI};
    auto field = WaveField::from_function(g, 0.5, [](double x, double, double) {
        return cplx(1.0 + 0.2 * std::cos(x), 0.0);
    });
    field.normalize();

    SECTION("zero potential: both shares vanish") {
        const auto vz = RadialPotential::zero(1.0);
        const auto sol = solve_dirichlet(vz, 1.0, default_scattering_step(vz, 1.0));
        RegimeParams params(64.0, 0.5, 1.0, 1.0, 0.0);
        const auto split = energy_density_split(field, params, sol, vz);
        CHECK(split.kinetic_coupling == Catch::Approx(0.0).margin(1e-14));
        CHECK(split.interaction_coupling == Catch::Approx(0.0).margin(1e-14));
    }

    SECTION("GP point: shares split by theta = b0/a0 in (0,1)") {
        const auto sol = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0));
        RegimeParams params(64.0, 0.5, 1.0, 1.0, 0.0);
        const auto split = energy_density_split(field, params, sol, v);
        const double theta = sol.b0 / sol.a0;
        CHECK(theta > 0.0);
        CHECK(theta < 1.0);
        CHECK(split.kinetic_coupling ==
              Catch::Approx(4.0 * M_PI * theta * sol.a0).epsilon(1e-12));
        // the residual is the kernel-to-delta error; it decays ~ S^-2 here
        RegimeParams params4(256.0, 0.5, 1.0, 1.0, 0.0);  // 4x the scale
        const auto split4 = energy_density_split(field, params4, sol, v);
        CHECK(split.interaction_residual < 1e-4);
        CHECK(split4.interaction_residual < split.interaction_residual / 8.0);
    }

    SECTION("mu sweep: interaction share -> 0, kinetic -> 4 pi mu~ c0, eta-controlled") {
        std::vector<double> mus{1.0, 1e-2, 1e-4};
        double prev_int = 1e9;
        std::vector<double> ratios;
        for (double mu : mus) {
            // fix mu~ = 1 by taking lambda = 1/mu (HC-style normalization)
            const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu));
            const double eta = capacity(v) - sol.a0;
            const double interaction = 4.0 * M_PI * (sol.a0 - sol.b0);
            const double kinetic_gap = std::fabs(4.0 * M_PI * sol.b0 - 4.0 * M_PI * capacity(v));
            CHECK(interaction < prev_int);
            prev_int = interaction;
            ratios.push_back(kinetic_gap / (4.0 * M_PI * eta));
        }
        const double rmax = *std::max_element(ratios.begin(), ratios.end());
        const double rmin = *std::min_element(ratios.begin(), ratios.end());
        INFO("eta-control ratios " << ratios[0] << " " << ratios[1] << " " << ratios[2]);
        CHECK(rmax <= 2.0 * rmin);
    }
}
