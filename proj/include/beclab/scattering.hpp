#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <tuple>
#include <vector>

#include "beclab/errors.hpp"
#include "beclab/radial.hpp"

namespace beclab {

/// Zero-energy scattering solution of (-mu Lap + v) f = 0, f -> 1 at infinity,
/// reduced to -mu m'' + v m = 0 with m(0) = 0 and m(r) = r - a0 for r >= R0.
struct ScatteringSolution {
    double mu = 1.0;
    std::vector<double> r_grid;    // 0 .. r_max, uniform on [0, R0], tail appended
    std::vector<double> m_values;  // normalized so m'(R0) = 1
    std::vector<double> f_values;  // f = m/r, f(0) = c1
    std::vector<double> df_values; // f' = (m' r - m)/r^2
    double a0 = 0.0;               // scattering length, a0 = R0 - m(R0)/m'(R0)
    double c1 = 1.0;               // f(0+), the monotone minimum of f
    double b0 = 0.0;               // kinetic fraction, (1/4pi) int |grad f|^2
    double step = 0.0;
    std::size_t i_R0 = 0;          // index of the node at r = R0
    double R0 = 0.0;

    /// f extended past the stored grid by the exact far-field profile 1 - a0/r.
    double f_at(double r) const {
        if (r <= 0.0) return c1;
        if (r >= R0) return 1.0 - a0 / r;
        const double h = r_grid[1] - r_grid[0];
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(r / h), i_R0 - 1);
        const double w = (r - r_grid[i]) / h;
        return f_values[i] * (1.0 - w) + f_values[i + 1] * w;
    }
};

inline double default_scattering_step(const RadialPotential& v, double mu) {
    double s = v.R0 / 200.0;
    if (v.v_max > 0.0) s = std::min(s, 0.1 * std::sqrt(mu / v.v_max));
    return s;
}

namespace detail {

// One RK4 step of m'' = q(r) m for the pair y = (m, m').
template <class Q>
inline void rk4_step(double r, double h, const Q& q, double& m, double& p) {
    const double k1m = p, k1p = q(r) * m;
    const double qm = q(r + 0.5 * h);
    const double k2m = p + 0.5 * h * k1p, k2p = qm * (m + 0.5 * h * k1m);
    const double k3m = p + 0.5 * h * k2p, k3p = qm * (m + 0.5 * h * k2m);
    const double k4m = p + h * k3p, k4p = q(r + h) * (m + h * k3m);
    m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
    p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
}

// Sturm-Liouville integration with running renormalization.  The equation is
// linear, so rescaling (m, m') mid-flight is exact; the per-node log-scale
// lets the caller reconstruct any normalization afterwards.  This keeps a
// single code path valid down to arbitrarily small mu, where m grows like
// exp(r sqrt(v/mu)) and would otherwise overflow.
struct ScaledTrace {
    std::vector<double> r, m, p, log_scale;
};

template <class Q>
inline ScaledTrace integrate_scaled(const Q& q, double r0, double r1, std::size_t n_steps) {
    ScaledTrace t;
    t.r.reserve(n_steps + 1);
    t.m.reserve(n_steps + 1);
    t.p.reserve(n_steps + 1);
    t.log_scale.reserve(n_steps + 1);
    const double h = (r1 - r0) / static_cast<double>(n_steps);
    double m = 0.0, p = 1.0, lambda = 0.0;
    if (r0 > 0.0) throw GridMismatch("integrate_scaled starts at r = 0");
    t.r.push_back(0.0);
    t.m.push_back(0.0);
    t.p.push_back(1.0);
    t.log_scale.push_back(0.0);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double r = r0 + h * static_cast<double>(i);
        rk4_step(r, h, q, m, p);
        const double mag = std::max(std::fabs(m), std::fabs(p));
        if (mag > 1e140) {
            m /= mag;
            p /= mag;
            lambda += std::log(mag);
        }
        if (!std::isfinite(m) || !std::isfinite(p))
            throw StepTooCoarse("non-finite Sturm-Liouville state at r = " + std::to_string(r + h));
        t.r.push_back(r0 + h * static_cast<double>(i + 1));
        t.m.push_back(m);
        t.p.push_back(p);
        t.log_scale.push_back(lambda);
    }
    return t;
}

} // namespace detail

/// Solve the Dirichlet zero-energy scattering problem by 4th-order shooting.
///
/// Integrates -mu m'' + v m = 0 from m(0) = 0, m'(0) = 1, reads off
/// a0 = R0 - m(R0)/m'(R0), rescales so m'(R0) = 1, and appends the exact
/// linear tail m = r - a0 up to r_max.
inline ScatteringSolution solve_dirichlet(const RadialPotential& v, double mu, double step,
                                          double r_max = 0.0) {
    if (!(mu > 0.0)) throw NonPositiveMu("mu = " + std::to_string(mu));
    const double step_limit = default_scattering_step(v, mu);
    if (step > step_limit * (1.0 + 1e-12))
        throw StepTooCoarse("step " + std::to_string(step) + " exceeds boundary-layer limit " +
                            std::to_string(step_limit));
    if (r_max <= 0.0) r_max = 2.0 * v.R0;

    auto n_in = static_cast<std::size_t>(std::ceil(v.R0 / step));
    if (n_in % 2) ++n_in;
    n_in = std::max<std::size_t>(n_in, 4);
    const double h = v.R0 / static_cast<double>(n_in);

    // interior limit of v on the closed interval [0, R0]; for n = 0 potentials
    // v(R0-) = v0, and sampling 0 there would cost an O(h) bias in a0
    const auto q = [&](double r) {
        const double vr = v.amplitude_profile(std::min(r, v.R0));
        if (vr < 0.0) throw InvalidPotential("negative sample at r = " + std::to_string(r));
        return vr / mu;
    };
    const auto trace = detail::integrate_scaled(q, 0.0, v.R0, n_in);

    const double m_end = trace.m.back(), p_end = trace.p.back(), lam_end = trace.log_scale.back();
    if (p_end <= 0.0 || m_end <= 0.0)
        throw StepTooCoarse("lost positivity of m at R0; boundary layer unresolved");

    ScatteringSolution sol;
    sol.mu = mu;
    sol.step = h;
    sol.R0 = v.R0;
    sol.a0 = v.R0 - m_end / p_end;
    sol.i_R0 = n_in;

    const std::size_t n_tail = static_cast<std::size_t>(std::ceil((r_max - v.R0) / h));
    sol.r_grid.resize(n_in + 1 + n_tail);
    sol.m_values.resize(sol.r_grid.size());
    sol.f_values.resize(sol.r_grid.size());
    sol.df_values.resize(sol.r_grid.size());

    for (std::size_t i = 0; i <= n_in; ++i) {
        const double r = trace.r[i];
        const double scale = std::exp(trace.log_scale[i] - lam_end) / p_end;
        const double m = trace.m[i] * scale;
        const double p = trace.p[i] * scale;
        sol.r_grid[i] = r;
        sol.m_values[i] = m;
        if (i == 0) {
            sol.f_values[0] = p;  // f(0+) = m'(0)
            sol.df_values[0] = 0.0;
        } else {
            sol.f_values[i] = m / r;
            sol.df_values[i] = (p * r - m) / (r * r);
        }
    }
    sol.c1 = sol.f_values[0];
    for (std::size_t j = 0; j < n_tail; ++j) {
        const double r = v.R0 + h * static_cast<double>(j + 1);
        const std::size_t i = n_in + 1 + j;
        sol.r_grid[i] = r;
        sol.m_values[i] = r - sol.a0;
        sol.f_values[i] = 1.0 - sol.a0 / r;
        sol.df_values[i] = sol.a0 / (r * r);
    }

    // b0 = int_0^R0 f'(r)^2 r^2 dr + a0^2/R0  (the tail integrates exactly)
    std::vector<double> integ(n_in + 1);
    for (std::size_t i = 0; i <= n_in; ++i) {
        const double fp = sol.df_values[i];
        integ[i] = fp * fp * sol.r_grid[i] * sol.r_grid[i];
    }
    sol.b0 = simpson_uniform(integ, h) + sol.a0 * sol.a0 / v.R0;
    return sol;
}

/// Scattering length by its defining integral, (1/mu) int_0^R0 v m r dr.
/// Agrees with the geometric a0 = R0 - m(R0)/m'(R0) up to quadrature error.
inline double scattering_length_by_integral(const ScatteringSolution& sol,
                                            const RadialPotential& v) {
    if (sol.i_R0 == 0 || sol.i_R0 >= sol.r_grid.size())
        throw GridMismatch("solution grid does not span [0, R0]");
    if (std::fabs(sol.r_grid[sol.i_R0] - v.R0) > 1e-12 * std::max(1.0, v.R0))
        throw GridMismatch("solution was solved for a different support radius");
    std::vector<double> integ(sol.i_R0 + 1);
    for (std::size_t i = 0; i <= sol.i_R0; ++i) {
        const double r = sol.r_grid[i];
        integ[i] = v.amplitude_profile(std::min(r, v.R0)) * sol.m_values[i] * r;
    }
    return simpson_uniform(integ, sol.step) / sol.mu;
}

/// Electrostatic capacity of a radial potential strictly positive inside its support.
inline double capacity(const RadialPotential& v) {
    if (v.v_max <= 0.0)
        throw InvalidPotential("capacity requires v > 0 in the interior of its support");
    return v.R0;
}

/// Kinetic fraction b0 = a0 - (1/mu) int v m^2 dr, the part of the scattering
/// length carried by |grad f|^2.  Result lies in [0, a0].
inline double b0_kinetic_fraction(const ScatteringSolution& sol, const RadialPotential& v) {
    if (std::fabs(sol.r_grid[sol.i_R0] - v.R0) > 1e-12 * std::max(1.0, v.R0))
        throw GridMismatch("solution was solved for a different support radius");
    std::vector<double> integ(sol.i_R0 + 1);
    for (std::size_t i = 0; i <= sol.i_R0; ++i) {
        const double r = sol.r_grid[i];
        const double m = sol.m_values[i];
        integ[i] = v.amplitude_profile(std::min(r, v.R0)) * m * m;
    }
    const double res = sol.a0 - simpson_uniform(integ, sol.step) / sol.mu;
    if (res < -1e-9 * std::max(1.0, sol.a0))
        throw NegativeResult("b0 = " + std::to_string(res) + "; quadrature beyond tolerance");
    return std::max(res, 0.0);
}

/// Fit of log eta against log mu, eta(mu) = c0 - a0(mu).
struct EtaRateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_rel_residual = 0.0;
    std::vector<double> mu_used;
    std::vector<double> eta_used;
};

/// Least-squares rate fit for the semiclassical defect eta(mu) = c0 - a0(mu).
/// Discards pre-asymptotic points with eta > 0.3 c0; expects slope ~ 1/(n+2).
template <class PotentialFamily>
inline EtaRateFit eta_rate_fit(const PotentialFamily& family, double n,
                               const std::vector<double>& mu_list) {
    const RadialPotential v = family(n);
    const double c0 = capacity(v);
    EtaRateFit fit;
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> mu_all, eta_all;
    for (double mu : mu_list) {
        const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu));
        const double eta = c0 - sol.a0;
        if (!(eta < prev))
            throw NonMonotoneEta("eta not decreasing at mu = " + std::to_string(mu));
        prev = eta;
        mu_all.push_back(mu);
        eta_all.push_back(eta);
    }
    for (std::size_t i = 0; i < mu_all.size(); ++i) {
        if (eta_all[i] > 0.3 * c0) continue;  // pre-asymptotic window guard
        fit.mu_used.push_back(mu_all[i]);
        fit.eta_used.push_back(eta_all[i]);
    }
    if (fit.mu_used.size() < 3)
        throw NonMonotoneEta("fewer than 3 points inside the asymptotic fit window");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < fit.mu_used.size(); ++i) {
        lx.push_back(std::log(fit.mu_used[i]));
        ly.push_back(std::log(fit.eta_used[i]));
    }
    std::tie(fit.slope, fit.intercept) = linear_fit(lx, ly);
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double pred = fit.intercept + fit.slope * lx[i];
        fit.max_rel_residual = std::max(fit.max_rel_residual,
                                        std::fabs(ly[i] - pred) / std::fabs(ly[i]));
    }
    return fit;
}

/// Closed-form scattering length for the constant potential v0 1_{[0,R0)}.
inline double constant_potential_a0(double v0, double R0, double mu) {
    const double s = std::sqrt(mu / v0);
    return R0 - s * std::tanh(R0 / s);
}

} // namespace beclab
