#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "beclab/errors.hpp"
#include "beclab/grid.hpp"

namespace beclab {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Initial phase data for the eikonal system: value, gradient and Hessian at
/// arbitrary points.  Analytic closures cover non-periodic test phases; grid
/// phases are sampled spectrally and interpolated.
struct PhaseField {
    int dim = 1;
    std::function<double(const Vec3&)> phi;
    std::function<Vec3(const Vec3&)> grad;
    std::function<Mat3(const Vec3&)> hess;
};

inline PhaseField linear_phase(int dim, const Vec3& xi) {
    PhaseField p;
    p.dim = dim;
    p.phi = [xi, dim](const Vec3& x) {
        double s = 0.0;
        for (int d = 0; d < dim; ++d) s += xi[d] * x[d];
        return s;
    };
    p.grad = [xi](const Vec3&) { return xi; };
    p.hess = [](const Vec3&) { return Mat3{}; };
    return p;
}

inline PhaseField quadratic_phase(int dim, double a) {  // phi = a |x|^2 / 2
    PhaseField p;
    p.dim = dim;
    p.phi = [a, dim](const Vec3& x) {
        double s = 0.0;
        for (int d = 0; d < dim; ++d) s += x[d] * x[d];
        return 0.5 * a * s;
    };
    p.grad = [a, dim](const Vec3& x) {
        Vec3 g{};
        for (int d = 0; d < dim; ++d) g[d] = a * x[d];
        return g;
    };
    p.hess = [a, dim](const Vec3&) {
        Mat3 h{};
        for (int d = 0; d < dim; ++d) h[d][d] = a;
        return h;
    };
    return p;
}

namespace detail {

inline double det_dim(const Mat3& m, int dim) {
    if (dim == 1) return m[0][0];
    if (dim == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Solve (I + t H) s = rhs for dim <= 3 by Cramer's rule.
inline Vec3 solve_flow_jacobian(const Mat3& H, double t, const Vec3& rhs, int dim) {
    Mat3 J{};
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) J[a][b] = (a == b ? 1.0 : 0.0) + t * H[a][b];
    const double det = det_dim(J, dim);
    if (std::fabs(det) < 1e-300) throw NewtonDivergence("singular flow Jacobian");
    Vec3 s{};
    if (dim == 1) {
        s[0] = rhs[0] / det;
    } else if (dim == 2) {
        s[0] = (rhs[0] * J[1][1] - J[0][1] * rhs[1]) / det;
        s[1] = (J[0][0] * rhs[1] - rhs[0] * J[1][0]) / det;
    } else {
        for (int col = 0; col < 3; ++col) {
            Mat3 Jc = J;
            for (int r = 0; r < 3; ++r) Jc[r][col] = rhs[r];
            s[col] = det_dim(Jc, 3) / det;
        }
    }
    return s;
}

inline double det_I_plus_tH(const Mat3& H, double t, int dim) {
    Mat3 J{};
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) J[a][b] = (a == b ? 1.0 : 0.0) + t * H[a][b];
    return det_dim(J, dim);
}

} // namespace detail

/// First t > 0 at which min over grid nodes of det(I + t D^2 phi_in) reaches
/// zero: grid scan for a bracket, then bisection.  +inf if none below t_max.
inline double caustic_time(const PhaseField& phase, const Grid& grid, double t_max = 100.0) {
    std::vector<Mat3> hess(grid.size());
    for_each_node(grid, [&](std::size_t idx, const std::array<int, 3>& k) {
        Vec3 x{grid.coord(k[0]), grid.dim > 1 ? grid.coord(k[1]) : 0.0,
               grid.dim > 2 ? grid.coord(k[2]) : 0.0};
        hess[idx] = phase.hess(x);
    });
    const auto min_det = [&](double t) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& H : hess) m = std::min(m, detail::det_I_plus_tH(H, t, grid.dim));
        return m;
    };
    const int scan = 2048;
    double t_lo = 0.0, t_hi = -1.0;
    for (int i = 1; i <= scan; ++i) {
        const double t = t_max * i / scan;
        if (min_det(t) <= 0.0) {
            t_hi = t;
            t_lo = t_max * (i - 1) / scan;
            break;
        }
    }
    if (t_hi < 0.0) return std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100 && t_hi - t_lo > 1e-13 * std::max(1.0, t_hi); ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (min_det(mid) <= 0.0)
            t_hi = mid;
        else
            t_lo = mid;
    }
    return 0.5 * (t_lo + t_hi);
}

namespace detail {

// Invert the flow map X(t, y) = y + t grad phi_in(y) = x by damped Newton.
inline Vec3 invert_flow(const PhaseField& phase, double t, const Vec3& x, int dim) {
    Vec3 y{};
    const Vec3 gx = phase.grad(x);
    for (int d = 0; d < dim; ++d) y[d] = x[d] - t * gx[d];
    const auto residual = [&](const Vec3& yy, Vec3& r) {
        const Vec3 g = phase.grad(yy);
        double n2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            r[d] = yy[d] + t * g[d] - x[d];
            n2 += r[d] * r[d];
        }
        return std::sqrt(n2);
    };
    Vec3 r{};
    double rn = residual(y, r);
    for (int it = 0; it < 50; ++it) {
        if (rn < 1e-12) return y;
        const Mat3 H = phase.hess(y);
        const Vec3 step = solve_flow_jacobian(H, t, r, dim);
        double damping = 1.0;
        for (int half = 0; half < 40; ++half) {
            Vec3 y_try{};
            for (int d = 0; d < dim; ++d) y_try[d] = y[d] - damping * step[d];
            Vec3 r_try{};
            const double rn_try = residual(y_try, r_try);
            if (rn_try < rn) {
                y = y_try;
                r = r_try;
                rn = rn_try;
                break;
            }
            damping *= 0.5;
            if (half == 39)
                throw NewtonDivergence("flow inversion stalled at x = (" +
                                       std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                                       ", " + std::to_string(x[2]) + ")");
        }
    }
    if (rn >= 1e-12)
        throw NewtonDivergence("flow inversion did not converge at x = (" +
                               std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
                               std::to_string(x[2]) + ")");
    return y;
}

} // namespace detail

struct PhaseSolution {
    std::vector<double> phi_eik;
    std::array<std::vector<double>, 3> grad_phi;
};

/// Characteristic solution of d_t phi + |grad phi|^2 / 2 = 0:
/// grad phi(t, x) = grad phi_in(y), phi(t, x) = phi_in(y) + t |grad phi_in(y)|^2 / 2
/// with y the flow-map preimage of x.
inline PhaseSolution solve_phase(const PhaseField& phase, const Grid& grid, double t,
                                 double caustic_t = -1.0) {
    if (caustic_t < 0.0) caustic_t = caustic_time(phase, grid);
    if (t >= caustic_t) throw PastCaustic("t >= caustic time");
    PhaseSolution sol;
    sol.phi_eik.resize(grid.size());
    for (int d = 0; d < grid.dim; ++d) sol.grad_phi[d].resize(grid.size());
    for_each_node(grid, [&](std::size_t idx, const std::array<int, 3>& k) {
        Vec3 x{grid.coord(k[0]), grid.dim > 1 ? grid.coord(k[1]) : 0.0,
               grid.dim > 2 ? grid.coord(k[2]) : 0.0};
        const Vec3 y = detail::invert_flow(phase, t, x, grid.dim);
        const Vec3 g = phase.grad(y);
        double g2 = 0.0;
        for (int d = 0; d < grid.dim; ++d) {
            sol.grad_phi[d][idx] = g[d];
            g2 += g[d] * g[d];
        }
        sol.phi_eik[idx] = phase.phi(y) + 0.5 * t * g2;
    });
    return sol;
}

/// Transport the complex amplitude along characteristics:
/// |a|^2 (t, X(t,y)) J(t,y) = |a_in(y)|^2 with J = det(I + t D^2 phi_in), and
/// the cubic rotation theta = -c0 |a_in(y)|^2 int_0^t ds / J(s,y) integrated
/// by fixed-order Gauss-Legendre on the known rational integrand.
inline std::vector<cplx> solve_amplitude(const std::function<cplx(const Vec3&)>& a_in,
                                         const PhaseField& phase, double c0, double t,
                                         const Grid& grid, double caustic_t = -1.0) {
    if (caustic_t < 0.0) caustic_t = caustic_time(phase, grid);
    if (t >= caustic_t) throw PastCaustic("t >= caustic time");
    // 32-point Gauss-Legendre nodes/weights on [0, 1]
    static const int NQ = 32;
    static std::array<double, NQ> qx, qw;
    static bool init = [] {
        // Newton on Legendre polynomials
        for (int i = 0; i < NQ; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (NQ + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= NQ; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = NQ * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::fabs(dx) < 1e-16) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= NQ; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = NQ * (x * p1 - p0) / (x * x - 1.0);
            qx[i] = 0.5 * (x + 1.0);
            qw[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        return true;
    }();
    (void)init;

    std::vector<cplx> out(grid.size());
    for_each_node(grid, [&](std::size_t idx, const std::array<int, 3>& k) {
        Vec3 x{grid.coord(k[0]), grid.dim > 1 ? grid.coord(k[1]) : 0.0,
               grid.dim > 2 ? grid.coord(k[2]) : 0.0};
        const Vec3 y = detail::invert_flow(phase, t, x, grid.dim);
        const Mat3 H = phase.hess(y);
        const double J_t = detail::det_I_plus_tH(H, t, grid.dim);
        const cplx a0 = a_in(y);
        double theta = 0.0;
        if (c0 != 0.0) {
            double integral = 0.0;
            for (int q = 0; q < NQ; ++q)
                integral += qw[q] / detail::det_I_plus_tH(H, t * qx[q], grid.dim);
            theta = -c0 * std::norm(a0) * t * integral;
        }
        out[idx] = a0 / std::sqrt(J_t) * cplx(std::cos(theta), std::sin(theta));
    });
    return out;
}

/// Periodic cubic (Catmull-Rom) interpolation of a complex grid field.
inline cplx interp_cubic_periodic(const Grid& g, const std::vector<cplx>& v, const Vec3& x) {
    std::array<std::array<double, 4>, 3> w{};
    std::array<std::array<int, 4>, 3> ix{};
    for (int d = 0; d < g.dim; ++d) {
        double u = x[d] / g.h();
        double base = std::floor(u);
        const double f = u - base;
        const int i0 = static_cast<int>(base);
        for (int j = 0; j < 4; ++j) {
            int ii = (i0 - 1 + j) % g.n;
            if (ii < 0) ii += g.n;
            ix[d][j] = ii;
        }
        // Catmull-Rom weights
        w[d][0] = 0.5 * (-f + 2.0 * f * f - f * f * f);
        w[d][1] = 0.5 * (2.0 - 5.0 * f * f + 3.0 * f * f * f);
        w[d][2] = 0.5 * (f + 4.0 * f * f - 3.0 * f * f * f);
        w[d][3] = 0.5 * (-f * f + f * f * f);
    }
    cplx acc = 0.0;
    const int jmax = 4, kmax = g.dim > 1 ? 4 : 1, lmax = g.dim > 2 ? 4 : 1;
    for (int j = 0; j < jmax; ++j)
        for (int kk = 0; kk < kmax; ++kk)
            for (int l = 0; l < lmax; ++l) {
                std::size_t idx = static_cast<std::size_t>(ix[0][j]);
                double weight = w[0][j];
                if (g.dim > 1) {
                    idx = idx * g.n + ix[1][kk];
                    weight *= w[1][kk];
                }
                if (g.dim > 2) {
                    idx = idx * g.n + ix[2][l];
                    weight *= w[2][l];
                }
                acc += weight * v[idx];
            }
    return acc;
}

/// Wrap a sampled complex field into an amplitude callback (cubic terminus
/// interpolation for characteristic solvers).
inline std::function<cplx(const Vec3&)> amplitude_from_grid(const Grid& g,
                                                            std::vector<cplx> values) {
    return [g, values = std::move(values)](const Vec3& x) {
        Vec3 xw = x;
        for (int d = 0; d < g.dim; ++d) {
            xw[d] = std::fmod(xw[d], g.box);
            if (xw[d] < 0.0) xw[d] += g.box;
        }
        return interp_cubic_periodic(g, values, xw);
    };
}

/// Periodic phase sampled on a grid; gradient and Hessian precomputed
/// spectrally, queried by cubic interpolation.
inline PhaseField grid_phase(const Grid& g, const std::vector<double>& phi_values) {
    PhaseField p;
    p.dim = g.dim;
    std::vector<cplx> phi_c(phi_values.size());
    for (std::size_t i = 0; i < phi_values.size(); ++i) phi_c[i] = phi_values[i];
    auto phi_interp = amplitude_from_grid(g, phi_c);
    std::array<std::function<cplx(const Vec3&)>, 3> grad_interp;
    std::array<std::array<std::function<cplx(const Vec3&)>, 3>, 3> hess_interp;
    for (int a = 0; a < g.dim; ++a) {
        auto da = spectral_derivative(g, phi_c, a);
        grad_interp[a] = amplitude_from_grid(g, da);
        for (int b = a; b < g.dim; ++b)
            hess_interp[a][b] = amplitude_from_grid(g, spectral_derivative(g, da, b));
    }
    p.phi = [phi_interp](const Vec3& x) { return phi_interp(x).real(); };
    p.grad = [grad_interp, dim = g.dim](const Vec3& x) {
        Vec3 out{};
        for (int d = 0; d < dim; ++d) out[d] = grad_interp[d](x).real();
        return out;
    };
    p.hess = [hess_interp, dim = g.dim](const Vec3& x) {
        Mat3 out{};
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                out[a][b] = hess_interp[a][b](x).real();
                out[b][a] = out[a][b];
            }
        return out;
    };
    return p;
}

} // namespace beclab
