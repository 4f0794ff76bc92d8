#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "beclab/eikonal.hpp"
#include "beclab/errors.hpp"
#include "beclab/euler.hpp"
#include "beclab/gp.hpp"
#include "beclab/grid.hpp"
#include "beclab/kernel.hpp"
#include "beclab/radial.hpp"
#include "beclab/wavefield.hpp"

namespace beclab {

/// Log-log slope fit of a sweep, with the largest sweep value discarded as a
/// pre-asymptotic guard.
struct SlopeReport {
    std::string sweep_variable;
    std::vector<double> values;
    std::vector<double> errors;
    double fitted_slope = 0.0;
    double expected_slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // max relative log residual
};

inline SlopeReport fit_slope(const std::string& variable, std::vector<double> values,
                             std::vector<double> errors, double expected,
                             bool discard_largest = true) {
    SlopeReport rep;
    rep.sweep_variable = variable;
    rep.values = values;
    rep.errors = errors;
    rep.expected_slope = expected;
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    if (discard_largest && order.size() > 3) order.pop_back();
    std::vector<double> lx, ly;
    for (std::size_t i : order) {
        if (!(values[i] > 0.0) || !(errors[i] > 0.0))
            throw GridMismatch("slope fit needs positive sweep values and errors");
        lx.push_back(std::log(values[i]));
        ly.push_back(std::log(errors[i]));
    }
    auto [slope, intercept] = linear_fit(lx, ly);
    rep.fitted_slope = slope;
    rep.intercept = intercept;
    for (std::size_t i = 0; i < lx.size(); ++i)
        rep.residual = std::max(rep.residual,
                                std::fabs(ly[i] - intercept - slope * lx[i]) /
                                    std::max(1e-300, std::fabs(ly[i])));
    return rep;
}

/// Modulated energy M[phi, rho, u] = 1/2 int |(i eps grad + u) phi|^2
///   + 1/2 int (K * rho_eps) rho_eps + c/2 int (rho^2 - 2 rho rho_eps).
inline double modulated_energy(const WaveField& field, const FluidState& fluid,
                               const EffectiveKernel& kernel, double c) {
    if (field.grid != fluid.grid) throw GridMismatch("field and fluid on different grids");
    const Grid& g = field.grid;
    double kin = 0.0;
    for (int d = 0; d < g.dim; ++d) {
        const auto dphi = spectral_derivative(g, field.values, d);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const cplx cov = cplx(0.0, field.eps) * dphi[i] + fluid.u[d][i] * field.values[i];
            kin += std::norm(cov);
        }
    }
    kin *= 0.5 * g.cell_volume();
    const auto rho_eps = field.density();
    const auto conv = kernel.convolve(g, rho_eps);
    double pot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        pot += 0.5 * conv[i] * rho_eps[i] +
               0.5 * c * (fluid.rho[i] * fluid.rho[i] - 2.0 * fluid.rho[i] * rho_eps[i]);
    }
    return kin + pot * g.cell_volume();
}

/// Kinetic part 1/2 int |(i eps grad + u) phi|^2 alone.
inline double modulated_kinetic(const WaveField& field, const FluidState& fluid) {
    const Grid& g = field.grid;
    double kin = 0.0;
    for (int d = 0; d < g.dim; ++d) {
        const auto dphi = spectral_derivative(g, field.values, d);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const cplx cov = cplx(0.0, field.eps) * dphi[i] + fluid.u[d][i] * field.values[i];
            kin += std::norm(cov);
        }
    }
    return 0.5 * kin * g.cell_volume();
}

struct ModulatedEnergyReport {
    std::vector<double> t_grid;
    std::vector<double> M_values;
    std::vector<double> M_kin;
    std::vector<double> M_pot;
    std::vector<double> density_L2_err;
    std::vector<double> momentum_L1_err;
    std::vector<double> kinetic_L1_err;
    std::vector<double> coercivity_defect;
    double C_fit = 0.0;       // smallest C with M(t)+lam/L <= e^{Ct}(M(0)+eps^2+lam/L+eta)
    double kappa_fit = 0.0;   // smallest kappa with ||rho_eps-rho||^2 <= kappa * base
    double base = 0.0;        // M(0) + eps^2 + lambda/L + eta
};

/// Evaluate the modulated-energy mechanism along synchronized GP and Euler
/// trajectories and fit the Gronwall constant.
inline ModulatedEnergyReport gronwall_check(const GpTrajectory& gp_traj,
                                            const EulerTrajectory& euler_traj,
                                            const EffectiveKernel& kernel, double c,
                                            double lambda_over_L, double eta) {
    if (gp_traj.snapshots.size() != euler_traj.snapshots.size())
        throw DesyncedTrajectories("snapshot counts differ");
    for (std::size_t s = 0; s < gp_traj.times.size(); ++s)
        if (std::fabs(gp_traj.times[s] - euler_traj.times[s]) > 1e-9)
            throw DesyncedTrajectories("snapshot times differ at index " + std::to_string(s));
    if (euler_traj.status == EulerStatus::BlowUpProxy)
        throw DesyncedTrajectories("Euler trajectory ended in BlowUpProxy");

    ModulatedEnergyReport rep;
    const Grid& g = gp_traj.snapshots.front().grid;
    const double eps = gp_traj.snapshots.front().eps;
    for (std::size_t s = 0; s < gp_traj.snapshots.size(); ++s) {
        const auto& field = gp_traj.snapshots[s];
        const auto& fluid = euler_traj.snapshots[s];
        const double M = modulated_energy(field, fluid, kernel, c);
        const double Mk = modulated_kinetic(field, fluid);
        rep.t_grid.push_back(gp_traj.times[s]);
        rep.M_values.push_back(M);
        rep.M_kin.push_back(Mk);
        rep.M_pot.push_back(M - Mk);

        const auto rho_eps = field.density();
        std::vector<double> diff(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) diff[i] = rho_eps[i] - fluid.rho[i];
        const double derr = l2_norm_real(g, diff);
        rep.density_L2_err.push_back(derr);
        rep.coercivity_defect.push_back(
            std::max(0.0, 0.5 * Mk + 0.5 * c * derr * derr - M));

        const auto obs = observables(field, kernel);
        std::vector<double> mom_diff(g.size(), 0.0), kin_diff(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double md = 0.0, u2 = 0.0, j2 = 0.0;
            for (int d = 0; d < g.dim; ++d) {
                const double jd = obs.J[d][i] - fluid.rho[i] * fluid.u[d][i];
                j2 += jd * jd;
                u2 += fluid.u[d][i] * fluid.u[d][i];
            }
            md = std::sqrt(j2);
            mom_diff[i] = md;
            kin_diff[i] = std::fabs(2.0 * obs.e_kin[i] - fluid.rho[i] * u2);
        }
        rep.momentum_L1_err.push_back(l1_norm_real(g, mom_diff));
        rep.kinetic_L1_err.push_back(l1_norm_real(g, kin_diff));
    }

    rep.base = rep.M_values.front() + eps * eps + lambda_over_L + eta;
    for (std::size_t s = 0; s < rep.t_grid.size(); ++s) {
        const double t = rep.t_grid[s];
        if (t > 0.0) {
            const double ratio = (rep.M_values[s] + lambda_over_L) / rep.base;
            if (ratio > 1.0) rep.C_fit = std::max(rep.C_fit, std::log(ratio) / t);
        }
        const double d2 = rep.density_L2_err[s] * rep.density_L2_err[s];
        rep.kappa_fit = std::max(rep.kappa_fit, d2 / rep.base);
    }
    return rep;
}

/// Predicted fluid-side split of the internal energy density:
/// kinetic share 4 pi mu~ b0 rho^2, interaction share 4 pi mu~ (a0 - b0) rho^2,
/// the latter compared pointwise against 1/2 (K2 * rho) rho with K2 the
/// lambda v f^2 - scaled kernel mass.
struct EnergySplit {
    double kinetic_coupling = 0.0;      // 4 pi mu~ b0
    double interaction_coupling = 0.0;  // 4 pi mu~ (a0 - b0)
    double interaction_residual = 0.0;  // L1 gap to the directly-computed main term
    double kinetic_target = 0.0;        // 4 pi mu~ c0 (HC limit of the kinetic share)
};

inline EnergySplit energy_density_split(const WaveField& field, const RegimeParams& params,
                                        const ScatteringSolution& scattering,
                                        const RadialPotential& v) {
    EnergySplit split;
    const double mu_t = params.mu_tilde();
    const double b0 = scattering.b0;
    split.kinetic_coupling = 4.0 * M_PI * mu_t * b0;
    split.interaction_coupling = 4.0 * M_PI * mu_t * (scattering.a0 - b0);
    split.kinetic_target = v.v_max > 0.0 ? 4.0 * M_PI * mu_t * capacity(v) : 0.0;

    // mass and second moment of the lambda v f^2 - scaled kernel; the
    // convolution (K2 * rho) is expanded to second order in its tiny support
    std::vector<double> integ(scattering.i_R0 + 1), integ2(scattering.i_R0 + 1);
    for (std::size_t i = 0; i <= scattering.i_R0; ++i) {
        const double r = scattering.r_grid[i];
        const double f = scattering.f_values[i];
        const double w = v.amplitude_profile(std::min(r, v.R0)) * f * f * r * r;
        integ[i] = w;
        integ2[i] = w * r * r;
    }
    const double k2_mass =
        4.0 * M_PI * params.lambda() * simpson_uniform(integ, scattering.step);
    const double S = params.scale();
    const double k2_moment2 =
        4.0 * M_PI * params.lambda() * simpson_uniform(integ2, scattering.step) / (S * S);

    const Grid& g = field.grid;
    const auto rho = field.density();
    std::vector<cplx> rho_c(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho_c[i] = rho[i];
    const auto lap_rho = spectral_laplacian(g, rho_c);
    std::vector<double> gap(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double conv = k2_mass * rho[i] + k2_moment2 / 6.0 * lap_rho[i].real();
        gap[i] = 0.5 * conv * rho[i] - 0.5 * split.interaction_coupling * rho[i] * rho[i];
    }
    split.interaction_residual = l1_norm_real(g, gap);
    return split;
}

/// Shared setup of a WKB comparison run: identical (a_in, phi_in) fed to the
/// GP side as a_in e^{i phi_in / eps} and to the eikonal side as data for the
/// characteristic solver.
struct WkbSetup {
    Grid grid;
    std::function<cplx(const Vec3&)> a_in;  // L2-normalized on the grid
    PhaseField phase;
    double c0 = 0.0;      // amplitude rotation coupling of the limit system
    double T = 0.5;
    double s = 2.0;       // Sobolev index of the error norm
};

/// H^s distance between the GP amplitude a_N = phi e^{-i phi_eik/eps} and the
/// eikonal reference at time T.
inline double wkb_amplitude_error(const RegimeParams& params, const RadialPotential& v,
                                  const WkbSetup& setup) {
    const double eps = params.eps;
    const Grid& g = setup.grid;

    const auto sol = solve_dirichlet(v, params.mu(), default_scattering_step(v, params.mu()));
    const auto kernel = delta_kernel(params, sol);

    WaveField field;
    field.grid = g;
    field.eps = eps;
    field.values.resize(g.size());
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        Vec3 x{g.coord(k[0]), g.dim > 1 ? g.coord(k[1]) : 0.0, g.dim > 2 ? g.coord(k[2]) : 0.0};
        const double th = setup.phase.phi(x) / eps;
        field.values[idx] = setup.a_in(x) * cplx(std::cos(th), std::sin(th));
    });
    field.normalize();

    double dt = 0.5 * gp_dt_budget(field, kernel);
    const auto n_steps = static_cast<std::size_t>(std::ceil(setup.T / dt));
    dt = setup.T / static_cast<double>(n_steps);
    const auto traj = evolve(field, kernel, dt, setup.T, 4);

    const double caustic_t = caustic_time(setup.phase, g);
    if (setup.T >= caustic_t) throw PastCaustic("WKB horizon beyond the caustic time");
    const auto phase_T = solve_phase(setup.phase, g, setup.T, caustic_t);
    const auto a_ref = solve_amplitude(setup.a_in, setup.phase, setup.c0, setup.T, g, caustic_t);

    const auto& phi_T = traj.snapshots.back().values;
    std::vector<cplx> diff(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double th = -phase_T.phi_eik[i] / eps;
        diff[i] = phi_T[i] * cplx(std::cos(th), std::sin(th)) - a_ref[i];
    }
    return hs_norm(g, diff, setup.s);
}

/// Sweep the WKB amplitude error across regimes and fit the convergence slope.
/// sweep_values[i] is the abscissa of the fit (eps for SGP/BGP, N for HD).
inline SlopeReport wkb_error_sweep(const std::vector<RegimeParams>& params_list,
                                   const std::vector<double>& sweep_values,
                                   const RadialPotential& v, const WkbSetup& setup,
                                   const std::string& variable, double expected_slope) {
    if (params_list.size() != sweep_values.size())
        throw GridMismatch("params_list and sweep_values size mismatch");
    std::vector<double> errors;
    errors.reserve(params_list.size());
    for (const auto& p : params_list) errors.push_back(wkb_amplitude_error(p, v, setup));
    return fit_slope(variable, sweep_values, errors, expected_slope);
}

} // namespace beclab
