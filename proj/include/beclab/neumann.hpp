#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "beclab/errors.hpp"
#include "beclab/radial.hpp"
#include "beclab/scattering.hpp"

namespace beclab {

/// Ground state of (-mu Lap + v) f = E f on the ball of radius L with
/// f(L) = 1, f'(L) = 0, in the reduced form m = r f.
struct NeumannGroundState {
    double mu = 1.0;
    double L = 0.0;
    double E_gs = 0.0;
    std::vector<double> r_grid;
    std::vector<double> m_values;  // normalized so m(L) = L
    std::vector<double> f_values;
    std::vector<double> df_values;
    double step = 0.0;
    std::size_t i_R0 = 0;
    double R0 = 0.0;

    double f_at(double r) const {
        if (r <= 0.0) return f_values.front();
        if (r >= L) return 1.0;
        // grid is uniform on [0, R0] and on [R0, L] with separate spacings
        if (r <= R0) {
            const double h = r_grid[1] - r_grid[0];
            const auto i = std::min<std::size_t>(static_cast<std::size_t>(r / h), i_R0 - 1);
            const double w = (r - r_grid[i]) / h;
            return f_values[i] * (1.0 - w) + f_values[i + 1] * w;
        }
        const double h = r_grid[i_R0 + 1] - r_grid[i_R0];
        auto i = i_R0 + std::min<std::size_t>(static_cast<std::size_t>((r - R0) / h),
                                              r_grid.size() - i_R0 - 2);
        const double w = (r - r_grid[i]) / h;
        return f_values[i] * (1.0 - w) + f_values[i + 1] * w;
    }
};

namespace detail {

// L m'(L) - m(L) in scaled form; positive at E = 0, crosses zero at the ground state.
struct NeumannShot {
    double residual_sign;  // sign of L p(L) - m(L)
    ScaledTrace inner, outer;
};

inline NeumannShot neumann_shoot(const RadialPotential& v, double mu, double L, double E,
                                 std::size_t n_in, std::size_t n_out) {
    const auto q_in = [&](double r) {
        const double vr = v.amplitude_profile(std::min(r, v.R0));
        if (vr < 0.0) throw InvalidPotential("negative sample at r = " + std::to_string(r));
        return (vr - E) / mu;
    };
    NeumannShot shot;
    shot.inner = integrate_scaled(q_in, 0.0, v.R0, n_in);

    // continue on [R0, L] where v = 0
    const double h = (L - v.R0) / static_cast<double>(n_out);
    double m = shot.inner.m.back(), p = shot.inner.p.back(), lam = shot.inner.log_scale.back();
    const auto q_out = [E, mu](double) { return -E / mu; };
    shot.outer.r.push_back(v.R0);
    shot.outer.m.push_back(m);
    shot.outer.p.push_back(p);
    shot.outer.log_scale.push_back(lam);
    for (std::size_t i = 0; i < n_out; ++i) {
        rk4_step(v.R0 + h * static_cast<double>(i), h, q_out, m, p);
        const double mag = std::max(std::fabs(m), std::fabs(p));
        if (mag > 1e140) {
            m /= mag;
            p /= mag;
            lam += std::log(mag);
        }
        shot.outer.r.push_back(v.R0 + h * static_cast<double>(i + 1));
        shot.outer.m.push_back(m);
        shot.outer.p.push_back(p);
        shot.outer.log_scale.push_back(lam);
    }
    shot.residual_sign = L * p - m;
    return shot;
}

} // namespace detail

/// Shooting + bisection solver for the Neumann ground state.
///
/// Locates the smallest E >= 0 with L m'(L) = m(L) and m > 0 on (0, L];
/// the initial bracket [0, 5 * 3 mu a0 / L^3] comes from the variational
/// upper bound on E_gs and is widened x10 up to three times if needed.
inline NeumannGroundState solve_neumann(const RadialPotential& v, double mu, double L,
                                        double step, double e_tol) {
    if (!(mu > 0.0)) throw NonPositiveMu("mu = " + std::to_string(mu));
    if (L < 2.0 * v.R0) throw GridMismatch("solve_neumann requires L >= 2 R0");
    if (!(e_tol > 0.0)) throw GridMismatch("e_tol must be positive");
    const double step_limit = default_scattering_step(v, mu);
    if (step > step_limit * (1.0 + 1e-12))
        throw StepTooCoarse("step exceeds boundary-layer limit");

    auto n_in = static_cast<std::size_t>(std::ceil(v.R0 / step));
    if (n_in % 2) ++n_in;
    n_in = std::max<std::size_t>(n_in, 4);
    const double h_in = v.R0 / static_cast<double>(n_in);
    auto n_out = static_cast<std::size_t>(std::ceil((L - v.R0) / h_in));
    if (n_out % 2) ++n_out;

    const double a0 = solve_dirichlet(v, mu, step).a0;
    double e_lo = 0.0;
    // variational upper bound with safety factor 5; floored so the free case
    // (a0 = 0, E_gs = 0) still brackets
    double e_hi = std::max(5.0 * 3.0 * mu * a0 / (L * L * L), 1e-12 * mu / (L * L));

    const auto sign_at = [&](double E) {
        return detail::neumann_shoot(v, mu, L, E, n_in, n_out).residual_sign;
    };
    const double s_lo = sign_at(e_lo);
    double E = 0.0;
    if (s_lo > 0.0) {
        double s_hi = sign_at(e_hi);
        int widen = 0;
        while (s_lo * s_hi > 0.0 && widen < 3) {
            e_hi *= 10.0;
            s_hi = sign_at(e_hi);
            ++widen;
        }
        if (s_lo * s_hi > 0.0)
            throw BracketFailure("no sign change of the Neumann condition in [0, " +
                                 std::to_string(e_hi) + "]");
        while (e_hi - e_lo > e_tol) {
            const double mid = 0.5 * (e_lo + e_hi);
            if (sign_at(mid) * s_lo > 0.0)
                e_lo = mid;
            else
                e_hi = mid;
        }
        E = 0.5 * (e_lo + e_hi);
    }  // s_lo <= 0 can only occur at a0 = 0 (round-off): the ground state is E = 0

    const auto shot = detail::neumann_shoot(v, mu, L, E, n_in, n_out);
    for (std::size_t i = 1; i < shot.inner.m.size(); ++i)
        if (shot.inner.m[i] <= 0.0) throw NodeDetected("m changes sign inside the support");
    for (double mi : shot.outer.m)
        if (mi <= 0.0) throw NodeDetected("m changes sign outside the support");

    NeumannGroundState gs;
    gs.mu = mu;
    gs.L = L;
    gs.E_gs = E;
    gs.step = h_in;
    gs.i_R0 = n_in;
    gs.R0 = v.R0;

    const double m_L = shot.outer.m.back();
    const double lam_L = shot.outer.log_scale.back();
    const std::size_t total = n_in + n_out + 1;
    gs.r_grid.resize(total);
    gs.m_values.resize(total);
    gs.f_values.resize(total);
    gs.df_values.resize(total);
    const auto emit = [&](std::size_t idx, double r, double m_s, double p_s, double lam) {
        const double scale = std::exp(lam - lam_L) / m_L * L;  // m(L) -> L
        const double m = m_s * scale;
        const double p = p_s * scale;
        gs.r_grid[idx] = r;
        gs.m_values[idx] = m;
        if (idx == 0) {
            gs.f_values[0] = p;
            gs.df_values[0] = 0.0;
        } else {
            gs.f_values[idx] = m / r;
            gs.df_values[idx] = (p * r - m) / (r * r);
        }
    };
    for (std::size_t i = 0; i <= n_in; ++i)
        emit(i, shot.inner.r[i], shot.inner.m[i], shot.inner.p[i], shot.inner.log_scale[i]);
    for (std::size_t j = 1; j <= n_out; ++j)
        emit(n_in + j, shot.outer.r[j], shot.outer.m[j], shot.outer.p[j],
             shot.outer.log_scale[j]);
    return gs;
}

/// int v (f_L)^power dx = 4 pi int_0^R0 v(r) m(r)^power r^(2-power) dr.
inline double potential_moment(const NeumannGroundState& gs, const RadialPotential& v,
                               int power) {
    if (power != 1 && power != 2) throw GridMismatch("potential_moment power must be 1 or 2");
    std::vector<double> integ(gs.i_R0 + 1);
    for (std::size_t i = 0; i <= gs.i_R0; ++i) {
        const double r = gs.r_grid[i];
        const double vr = v.amplitude_profile(std::min(r, v.R0));
        const double m = gs.m_values[i];
        integ[i] = vr * (power == 1 ? m * r : m * m);
    }
    return 4.0 * M_PI * simpson_uniform(integ, gs.step);
}

/// (1/4pi) int |grad f_L|^2 dx over the ball, the Neumann analogue of b0.
inline double b0_of_neumann(const NeumannGroundState& gs) {
    // piecewise Simpson over [0, R0] and [R0, L]
    std::vector<double> in(gs.i_R0 + 1), out(gs.r_grid.size() - gs.i_R0);
    for (std::size_t i = 0; i <= gs.i_R0; ++i) {
        const double fp = gs.df_values[i];
        in[i] = fp * fp * gs.r_grid[i] * gs.r_grid[i];
    }
    for (std::size_t j = gs.i_R0; j < gs.r_grid.size(); ++j) {
        const double fp = gs.df_values[j];
        out[j - gs.i_R0] = fp * fp * gs.r_grid[j] * gs.r_grid[j];
    }
    const double h_out = gs.r_grid[gs.i_R0 + 1] - gs.r_grid[gs.i_R0];
    return simpson_uniform(in, gs.step) + simpson_uniform(out, h_out);
}

// ---------------------------------------------------------------------------
// Dense finite-difference oracles.  Deliberately independent of the shooting
// path: 3-point stencil, tridiagonal algebra, Sturm-sequence bisection.
// ---------------------------------------------------------------------------

namespace fd {

// Potential sampling for the FD stencil; averages across the jump when a node
// sits exactly on the support boundary, which restores O(h^2) convergence.
inline double sample(const RadialPotential& v, double r) {
    const double d = 1e-9 * std::max(1.0, v.R0);
    const double lo = r > d ? (r - d < v.R0 ? v.amplitude_profile(r - d) : 0.0) : 0.0;
    const double hi = r + d < v.R0 ? v.amplitude_profile(r + d) : 0.0;
    return 0.5 * (lo + hi);
}

/// Dirichlet brute-force oracle: solve the linear BVP -mu m'' + v m = 0 with
/// m(0) = 0, m'(r_max) = 1 on a uniform grid and read a0 = r_max - m(r_max).
inline double dirichlet_a0(const RadialPotential& v, double mu, std::size_t n_cells,
                           double r_max) {
    const double h = r_max / static_cast<double>(n_cells);
    const std::size_t M = n_cells;  // unknowns m_1..m_M
    std::vector<double> diag(M), lower(M, 0.0), upper(M, 0.0), rhs(M, 0.0);
    for (std::size_t i = 1; i <= M; ++i) {
        const double r = h * static_cast<double>(i);
        diag[i - 1] = 2.0 * mu / (h * h) + sample(v, r);
        if (i > 1) lower[i - 1] = -mu / (h * h);
        if (i < M) upper[i - 1] = -mu / (h * h);
    }
    // ghost elimination for m'(r_max) = 1: m_{M+1} = m_{M-1} + 2h
    lower[M - 1] = -2.0 * mu / (h * h);
    rhs[M - 1] = 2.0 * mu / h;
    // Thomas algorithm
    for (std::size_t i = 1; i < M; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> m(M);
    m[M - 1] = rhs[M - 1] / diag[M - 1];
    for (std::size_t i = M - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    return r_max - m[M - 1];
}

struct Tridiag {
    std::vector<double> diag, offdiag;  // symmetric; offdiag[i] couples i and i+1
};

// Assemble the symmetrized FD operator for the Neumann eigenproblem in m-form.
inline Tridiag neumann_matrix(const RadialPotential& v, double mu, double L,
                              std::size_t n_cells) {
    const double h = L / static_cast<double>(n_cells);
    const std::size_t M = n_cells;  // m_1..m_M with m_0 = 0
    Tridiag T;
    T.diag.resize(M);
    T.offdiag.assign(M - 1, -mu / (h * h));
    for (std::size_t i = 1; i <= M; ++i)
        T.diag[i - 1] = 2.0 * mu / (h * h) + sample(v, h * static_cast<double>(i));
    // Neumann row via ghost m_{M+1} = m_{M-1} + 2h m_M / L, then the diagonal
    // similarity D = diag(1,..,1,sqrt(2)) restores symmetry.
    T.diag[M - 1] = 2.0 * mu / (h * h) - 2.0 * mu / (h * L) + sample(v, L);
    T.offdiag[M - 2] = -std::sqrt(2.0) * mu / (h * h);
    return T;
}

inline std::size_t count_below(const Tridiag& T, double x) {
    std::size_t count = 0;
    double q = T.diag[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < T.diag.size(); ++i) {
        const double e = T.offdiag[i - 1];
        double denom = q;
        if (std::fabs(denom) < 1e-300) denom = std::copysign(1e-300, denom == 0.0 ? -1.0 : denom);
        q = (T.diag[i] - x) - e * e / denom;
        if (q < 0) ++count;
    }
    return count;
}

/// Smallest eigenvalue of the FD Neumann operator by Sturm bisection.
inline double neumann_matrix_ground_energy(const RadialPotential& v, double mu, double L,
                                           std::size_t n_cells) {
    const Tridiag T = neumann_matrix(v, mu, L, n_cells);
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < T.diag.size(); ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::fabs(T.offdiag[i - 1]);
        if (i + 1 < T.diag.size()) radius += std::fabs(T.offdiag[i]);
        lo = std::min(lo, T.diag[i] - radius);
        hi = std::max(hi, T.diag[i] + radius);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(T, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// The same discrete operator solved by forward recurrence + bisection on the
/// discrete Neumann condition; must agree with the matrix eigenvalue.
inline double neumann_recurrence_ground_energy(const RadialPotential& v, double mu, double L,
                                               std::size_t n_cells) {
    const double h = L / static_cast<double>(n_cells);
    const std::size_t M = n_cells;
    std::vector<double> vs(M + 1);
    for (std::size_t i = 1; i <= M; ++i) vs[i] = sample(v, h * static_cast<double>(i));
    const auto residual = [&](double E) {
        double m_prev = 0.0, m = h, scale_guard = 0.0;
        for (std::size_t i = 1; i < M; ++i) {
            const double m_next =
                (2.0 + h * h * (vs[i] - E) / mu) * m - m_prev;
            m_prev = m;
            m = m_next;
            scale_guard = std::max(std::fabs(m), std::fabs(m_prev));
            if (scale_guard > 1e140) {
                m /= scale_guard;
                m_prev /= scale_guard;
            }
        }
        // row M: -mu (m_{M+1} - 2 m_M + m_{M-1})/h^2 + v_M m_M = E m_M with
        // ghost m_{M+1} = m_{M-1} + 2 h m_M / L
        return (2.0 + h * h * (vs[M] - E) / mu - 2.0 * h / L) * m - 2.0 * m_prev;
    };
    double lo = 0.0, hi = 16.0 * mu / (L * L);
    double r_lo = residual(lo), r_hi = residual(hi);
    int widen = 0;
    while (r_lo * r_hi > 0.0 && widen < 40) {
        hi *= 2.0;
        r_hi = residual(hi);
        ++widen;
    }
    if (r_lo * r_hi > 0.0) throw BracketFailure("FD recurrence: no bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) * r_lo > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace fd

/// Ground-state energy of the constant-potential Neumann problem from its
/// transcendental matching condition, solved to near machine precision.
/// Independent closed-form-style oracle for the shooting solver.
inline double constant_neumann_ground_energy(double v0, double R0, double mu, double L) {
    // inside: m = sinh(q r), q = sqrt((v0 - E)/mu); outside: oscillatory/linear
    // combination with omega = sqrt(E/mu).  Residual is L m'(L) - m(L).
    const auto residual = [&](double E) {
        const double q = std::sqrt((v0 - E) / mu);
        const double w = std::sqrt(E / mu);
        // normalize inside by cosh to keep numbers tame
        const double mR = std::tanh(q * R0) / q;   // m(R0)/cosh(qR0)
        const double pR = 1.0;                     // m'(R0)/cosh(qR0)
        const double c = std::cos(w * (L - R0)), s = std::sin(w * (L - R0));
        const double mL = mR * c + pR * s / w;
        const double pL = -mR * w * s + pR * c;
        return L * pL - mL;
    };
    double lo = 1e-18, hi = std::min(v0 * 0.5, mu * M_PI * M_PI / (L * L));
    double r_lo = residual(lo), r_hi = residual(hi);
    int widen = 0;
    while (r_lo * r_hi > 0.0 && widen < 60) {
        hi *= 2.0;
        if (hi >= v0) throw BracketFailure("transcendental oracle: bracket exceeds v0");
        r_hi = residual(hi);
        ++widen;
    }
    if (r_lo * r_hi > 0.0) throw BracketFailure("transcendental oracle: no bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) * r_lo > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace beclab
