#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "beclab/errors.hpp"
#include "beclab/grid.hpp"

namespace beclab {

/// Compressible Euler state in velocity form with pressure P = c rho^2 / 2.
struct FluidState {
    Grid grid;
    std::vector<double> rho;
    std::array<std::vector<double>, 3> u;
    double c = 0.0;  // pressure coupling: 4 pi a0 (GP) or 4 pi c0 (HC)
    double time = 0.0;

    double mass() const { return grid_integral_real(grid, rho); }

    double energy() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            double u2 = 0.0;
            for (int d = 0; d < grid.dim; ++d) u2 += u[d][i] * u[d][i];
            acc += 0.5 * rho[i] * u2 + 0.5 * c * rho[i] * rho[i];
        }
        return acc * grid.cell_volume();
    }

    double max_speed() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            double u2 = 0.0;
            for (int d = 0; d < grid.dim; ++d) u2 += u[d][i] * u[d][i];
            m = std::max(m, u2);
        }
        return std::sqrt(m);
    }

    double max_rho() const {
        double m = 0.0;
        for (double x : rho) m = std::max(m, x);
        return m;
    }

    double grad_u_max() const {
        double m = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            std::vector<cplx> uc(rho.size());
            for (std::size_t i = 0; i < rho.size(); ++i) uc[i] = u[a][i];
            for (int b = 0; b < grid.dim; ++b) {
                const auto d = spectral_derivative(grid, uc, b);
                for (const auto& z : d) m = std::max(m, std::fabs(z.real()));
            }
        }
        return m;
    }

    void validate() const {
        for (double x : rho)
            if (x < -1e-10) throw NaNDetected("rho fell below the undershoot tolerance");
    }
};

namespace detail {

// 2/3-rule anti-aliasing projection applied to products.
inline void dealias_23(const Grid& g, std::vector<double>& field) {
    std::vector<cplx> w(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) w[i] = field[i];
    fft_forward(g, w);
    const int cut = g.n / 3;
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        for (int d = 0; d < g.dim; ++d) {
            const int kk = k[d] <= g.n / 2 ? k[d] : k[d] - g.n;
            if (std::abs(kk) > cut) {
                w[idx] = 0.0;
                return;
            }
        }
    });
    fft_inverse(g, w);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = w[i].real();
}

inline std::vector<double> real_derivative(const Grid& g, const std::vector<double>& field,
                                           int axis) {
    std::vector<cplx> w(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) w[i] = field[i];
    const auto d = spectral_derivative(g, w, axis);
    std::vector<double> out(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) out[i] = d[i].real();
    return out;
}

} // namespace detail

struct EulerRhs {
    std::vector<double> drho;
    std::array<std::vector<double>, 3> du;
};

/// drho = -div(rho u), du = -(u . grad) u - c grad rho; spectral derivatives
/// with 2/3-rule dealiasing of the quadratic products.
inline EulerRhs euler_rhs(const FluidState& s) {
    const Grid& g = s.grid;
    EulerRhs rhs;
    rhs.drho.assign(g.size(), 0.0);
    for (int d = 0; d < g.dim; ++d) {
        std::vector<double> flux(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) flux[i] = s.rho[i] * s.u[d][i];
        detail::dealias_23(g, flux);
        const auto dflux = detail::real_derivative(g, flux, d);
        for (std::size_t i = 0; i < g.size(); ++i) rhs.drho[i] -= dflux[i];
    }
    for (int a = 0; a < g.dim; ++a) {
        rhs.du[a].assign(g.size(), 0.0);
        std::vector<double> advect(g.size(), 0.0);
        for (int b = 0; b < g.dim; ++b) {
            const auto dua = detail::real_derivative(g, s.u[a], b);
            for (std::size_t i = 0; i < g.size(); ++i) advect[i] += s.u[b][i] * dua[i];
        }
        detail::dealias_23(g, advect);
        const auto drho = detail::real_derivative(g, s.rho, a);
        for (std::size_t i = 0; i < g.size(); ++i)
            rhs.du[a][i] = -advect[i] - s.c * drho[i];
    }
    return rhs;
}

enum class EulerStatus { Completed, BlowUpProxy };

struct EulerTrajectory {
    std::vector<double> times;
    std::vector<FluidState> snapshots;
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> cfl_history;      // dt * (|u| + sqrt(2 c rho)) * k_max per step block
    EulerStatus status = EulerStatus::Completed;
    double time_reached = 0.0;
};

inline double euler_cfl_number(const FluidState& s, double dt) {
    const double k_max = M_PI * s.grid.n / s.grid.box;
    return dt * (s.max_speed() + std::sqrt(2.0 * s.c * s.max_rho())) * k_max;
}

/// Classical RK4 in time; halts with a BlowUpProxy status when ||grad u||_inf
/// exceeds 50x its initial value (smooth-solution guard, not an error).
inline EulerTrajectory evolve_euler(const FluidState& state0, double dt, double T,
                                    int snapshots_per_unit_time = 32) {
    if (euler_cfl_number(state0, dt) > 1.0 + 1e-9)
        throw CFLViolation("dt (|u| + sqrt(2 c rho)) k_max > 1");
    EulerTrajectory traj;
    const auto total_steps = static_cast<std::size_t>(std::llround(T / dt));
    const std::size_t cadence = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(1.0 / (dt * snapshots_per_unit_time))));
    FluidState s = state0;
    // 50x the initial ||grad u||, floored at the linear acoustic gradient
    // scale so quiescent data (u = 0) does not trip on sound waves
    const double acoustic_scale =
        std::sqrt(2.0 * s.c * s.max_rho()) * 2.0 * M_PI / s.grid.box;
    const double blowup_threshold =
        50.0 * std::max({s.grad_u_max(), acoustic_scale, 1e-8});

    const auto record = [&](double t) {
        traj.times.push_back(t);
        traj.snapshots.push_back(s);
        traj.mass.push_back(s.mass());
        traj.energy.push_back(s.energy());
    };
    record(0.0);

    const int dim = s.grid.dim;
    const auto axpy = [&](FluidState& out, const FluidState& base, const EulerRhs& k,
                          double w) {
        for (std::size_t i = 0; i < out.rho.size(); ++i)
            out.rho[i] = base.rho[i] + w * k.drho[i];
        for (int d = 0; d < dim; ++d)
            for (std::size_t i = 0; i < out.rho.size(); ++i)
                out.u[d][i] = base.u[d][i] + w * k.du[d][i];
    };

    FluidState tmp = s;
    for (std::size_t n = 1; n <= total_steps; ++n) {
        traj.cfl_history.push_back(euler_cfl_number(s, dt));
        const auto k1 = euler_rhs(s);
        axpy(tmp, s, k1, 0.5 * dt);
        const auto k2 = euler_rhs(tmp);
        axpy(tmp, s, k2, 0.5 * dt);
        const auto k3 = euler_rhs(tmp);
        axpy(tmp, s, k3, dt);
        const auto k4 = euler_rhs(tmp);
        for (std::size_t i = 0; i < s.rho.size(); ++i)
            s.rho[i] += dt / 6.0 * (k1.drho[i] + 2.0 * k2.drho[i] + 2.0 * k3.drho[i] +
                                    k4.drho[i]);
        for (int d = 0; d < dim; ++d)
            for (std::size_t i = 0; i < s.rho.size(); ++i)
                s.u[d][i] += dt / 6.0 * (k1.du[d][i] + 2.0 * k2.du[d][i] + 2.0 * k3.du[d][i] +
                                         k4.du[d][i]);
        s.time += dt;
        s.validate();
        if (s.grad_u_max() > blowup_threshold) {
            record(s.time);
            traj.status = EulerStatus::BlowUpProxy;
            traj.time_reached = s.time;
            return traj;
        }
        if (n % cadence == 0 || n == total_steps) record(s.time);
    }
    traj.status = EulerStatus::Completed;
    traj.time_reached = s.time;
    return traj;
}

} // namespace beclab
