#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "beclab/errors.hpp"
#include "beclab/grid.hpp"
#include "beclab/kernel.hpp"
#include "beclab/wavefield.hpp"

namespace beclab {

inline double gp_energy(const WaveField& field, const EffectiveKernel& kernel) {
    const Grid& g = field.grid;
    double kin = 0.0;
    std::vector<cplx> w = field.values;
    fft_forward(g, w);
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            const double f = g.freq(k[d]);
            k2 += f * f;
        }
        kin += k2 * std::norm(w[idx]);
    });
    kin *= 0.5 * field.eps * field.eps * g.volume() /
           (static_cast<double>(g.size()) * static_cast<double>(g.size()));
    const auto rho = field.density();
    const auto conv = kernel.convolve(g, rho);
    double pot = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) pot += conv[i] * rho[i];
    return kin + 0.5 * pot * g.cell_volume();
}

/// dt budget of the splitting: the nonlinear phase per step must stay small.
inline double gp_dt_budget(const WaveField& field, const EffectiveKernel& kernel) {
    const auto conv = kernel.convolve(field.grid, field.density());
    double vmax = 0.0;
    for (double x : conv) vmax = std::max(vmax, std::fabs(x));
    double budget = 0.1 * field.eps;
    if (vmax > 0.0) budget = std::min(budget, 0.5 * field.eps / vmax);
    return budget;
}

/// One Strang step: half nonlinear phase, exact spectral kinetic flow, half
/// nonlinear phase.  Mass is preserved to round-off by construction.  No
/// dealiasing is applied anywhere in the splitting: the nonlinearity enters
/// only as a pointwise phase in physical space, which cannot alias.
inline void strang_step_inplace(WaveField& field, const EffectiveKernel& kernel, double dt) {
    if (!(dt > 0.0)) throw StabilityViolation("dt must be positive");
    const Grid& g = field.grid;
    const double eps = field.eps;

    const auto half_phase = [&]() {
        const auto conv = kernel.convolve(g, field.density());
        double vmax = 0.0;
        for (double x : conv) vmax = std::max(vmax, std::fabs(x));
        if (vmax > 0.0 && dt > 0.5 * eps / vmax * (1.0 + 1e-9))
            throw StabilityViolation("dt exceeds 0.5 eps / ||K*rho||_inf");
        for (std::size_t i = 0; i < field.values.size(); ++i) {
            const double theta = -conv[i] * dt / (2.0 * eps);
            field.values[i] *= cplx(std::cos(theta), std::sin(theta));
        }
    };

    if (dt > 0.1 * eps * (1.0 + 1e-9))
        throw StabilityViolation("dt exceeds the phase-accuracy budget 0.1 eps");

    half_phase();
    fft_forward(g, field.values);
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            const double f = g.freq(k[d]);
            k2 += f * f;
        }
        const double theta = -0.5 * eps * dt * k2;
        field.values[idx] *= cplx(std::cos(theta), std::sin(theta));
    });
    fft_inverse(g, field.values);
    half_phase();

    for (const auto& z : field.values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw NaNDetected("non-finite amplitude after Strang step");
}

inline WaveField strang_step(const WaveField& field, const EffectiveKernel& kernel, double dt) {
    WaveField out = field;
    strang_step_inplace(out, kernel, dt);
    return out;
}

struct GpTrajectory {
    std::vector<double> times;
    std::vector<WaveField> snapshots;
    std::vector<double> mass;
    std::vector<double> energy;
};

/// Repeated Strang stepping with fixed snapshot cadence (snapshots include t=0
/// and t=T).  Records per-snapshot mass and energy.
inline GpTrajectory evolve(const WaveField& field0, const EffectiveKernel& kernel, double dt,
                           double T, int snapshots_per_unit_time = 32) {
    GpTrajectory traj;
    const auto total_steps = static_cast<std::size_t>(std::llround(T / dt));
    if (total_steps == 0) throw StabilityViolation("T/dt rounds to zero steps");
    std::size_t cadence = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(1.0 / (dt * snapshots_per_unit_time))));
    WaveField f = field0;
    const auto record = [&](double t) {
        traj.times.push_back(t);
        traj.snapshots.push_back(f);
        traj.mass.push_back(f.mass());
        traj.energy.push_back(gp_energy(f, kernel));
    };
    record(0.0);
    for (std::size_t s = 1; s <= total_steps; ++s) {
        strang_step_inplace(f, kernel, dt);
        if (s % cadence == 0 || s == total_steps) record(dt * static_cast<double>(s));
    }
    return traj;
}

struct ContinuityResidual {
    double mass_residual = 0.0;      // || d_t rho + div J ||_L2, worst snapshot
    double momentum_residual = 0.0;  // || d_t J + div(sigma - P I) + l ||_L2, worst snapshot
    double max_l_mean = 0.0;         // max |int l dx| over snapshots and components
};

/// The error term l_j = 1/2 [ (K * d_j rho) rho - (K * rho) d_j rho ].
inline std::array<std::vector<double>, 3> l_term(const Grid& g, const EffectiveKernel& kernel,
                                                 const std::vector<double>& rho) {
    std::vector<cplx> rho_c(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho_c[i] = rho[i];
    const auto conv_rho = kernel.convolve(g, rho);
    std::array<std::vector<double>, 3> l;
    for (int d = 0; d < g.dim; ++d) {
        const auto drho_c = spectral_derivative(g, rho_c, d);
        std::vector<double> drho(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i) drho[i] = drho_c[i].real();
        const auto conv_drho = kernel.convolve(g, drho);
        l[d].resize(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i)
            l[d][i] = 0.5 * (conv_drho[i] * rho[i] - conv_rho[i] * drho[i]);
    }
    return l;
}

/// Discrete check of the local conservation laws on >= 3 consecutive snapshots:
/// centered differences in time, spectral derivatives in space.
inline ContinuityResidual continuity_residual(const GpTrajectory& traj,
                                              const EffectiveKernel& kernel) {
    if (traj.snapshots.size() < 3)
        throw InsufficientSnapshots("need >= 3 snapshots for centered time differencing");
    const Grid& g = traj.snapshots.front().grid;
    ContinuityResidual out;

    for (std::size_t s = 1; s + 1 < traj.snapshots.size(); ++s) {
        // second-order 3-point time stencil, valid for non-uniform spacing
        const double h1 = traj.times[s] - traj.times[s - 1];
        const double h2 = traj.times[s + 1] - traj.times[s];
        const double c_prev = -h2 / (h1 * (h1 + h2));
        const double c_mid = (h2 - h1) / (h1 * h2);
        const double c_next = h1 / (h2 * (h1 + h2));
        const auto obs_prev = observables(traj.snapshots[s - 1], kernel);
        const auto obs = observables(traj.snapshots[s], kernel);
        const auto obs_next = observables(traj.snapshots[s + 1], kernel);

        std::vector<double> res(g.size());
        // mass: d_t rho + div J
        {
            std::vector<double> divJ(g.size(), 0.0);
            for (int d = 0; d < g.dim; ++d) {
                std::vector<cplx> Jc(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) Jc[i] = obs.J[d][i];
                const auto dJ = spectral_derivative(g, Jc, d);
                for (std::size_t i = 0; i < g.size(); ++i) divJ[i] += dJ[i].real();
            }
            for (std::size_t i = 0; i < g.size(); ++i)
                res[i] = c_prev * obs_prev.rho[i] + c_mid * obs.rho[i] +
                         c_next * obs_next.rho[i] + divJ[i];
            out.mass_residual = std::max(out.mass_residual, l2_norm_real(g, res));
        }
        // momentum: d_t J + div(sigma - P I) + l
        const auto l = l_term(g, kernel, obs.rho);
        for (int a = 0; a < g.dim; ++a) {
            std::vector<double> div_term(g.size(), 0.0);
            for (int b = 0; b < g.dim; ++b) {
                std::vector<cplx> t(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) {
                    t[i] = obs.sigma[a][b][i];
                    if (a == b) t[i] -= obs.P[i];
                }
                const auto dt_ab = spectral_derivative(g, t, b);
                for (std::size_t i = 0; i < g.size(); ++i) div_term[i] += dt_ab[i].real();
            }
            for (std::size_t i = 0; i < g.size(); ++i)
                res[i] = c_prev * obs_prev.J[a][i] + c_mid * obs.J[a][i] +
                         c_next * obs_next.J[a][i] + div_term[i] + l[a][i];
            out.momentum_residual = std::max(out.momentum_residual, l2_norm_real(g, res));
            out.max_l_mean = std::max(out.max_l_mean, std::fabs(grid_integral_real(g, l[a])));
        }
    }
    return out;
}

} // namespace beclab
