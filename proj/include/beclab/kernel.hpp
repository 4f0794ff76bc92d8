#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "beclab/errors.hpp"
#include "beclab/grid.hpp"
#include "beclab/neumann.hpp"
#include "beclab/regime.hpp"
#include "beclab/scattering.hpp"

namespace beclab {

/// Effective interaction kernel of the modified GP equation.
///
/// "scaled" tabulates K(x) = lambda S^3 (v f)(S|x|) with S = N^beta eps^2kappa
/// on a 3D grid together with its Fourier multiplier; "delta" collapses it to
/// g delta with g = 4 pi mu_tilde a0 (the coupling the scaled kernel carries
/// in the S -> infinity limit).
struct EffectiveKernel {
    enum class Mode { Scaled, Delta };
    Mode mode = Mode::Delta;
    double g = 0.0;                          // coupling in delta mode
    Grid grid;                               // grid of the tabulation (scaled mode)
    std::vector<double> fourier_multiplier;  // K-hat on the grid (scaled mode)
    double integral = 0.0;                   // int K dx by radial quadrature of the profile

    /// K * rho on the kernel's grid (pointwise g rho in delta mode).
    std::vector<double> convolve(const Grid& g_rho, const std::vector<double>& rho) const {
        if (mode == Mode::Delta) {
            std::vector<double> out(rho.size());
            for (std::size_t i = 0; i < rho.size(); ++i) out[i] = g * rho[i];
            return out;
        }
        if (g_rho != grid) throw GridMismatch("kernel tabulated on a different grid");
        std::vector<cplx> w(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i) w[i] = rho[i];
        fft_forward(g_rho, w);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] *= fourier_multiplier[i];
        fft_inverse(g_rho, w);
        std::vector<double> out(rho.size());
        for (std::size_t i = 0; i < rho.size(); ++i) out[i] = w[i].real();
        return out;
    }

    double mass() const { return mode == Mode::Delta ? g : integral; }
};

namespace detail {

// int_{R^3} lambda (vf)(y) dy = 4 pi lambda int v(r) f(r) r^2 dr on the solver grid.
template <class Profile>
inline double radial_kernel_mass(const RadialPotential& v, const Profile& prof, double lambda,
                                 double step, std::size_t i_R0,
                                 const std::vector<double>& r_grid) {
    std::vector<double> integ(i_R0 + 1);
    for (std::size_t i = 0; i <= i_R0; ++i) {
        const double r = r_grid[i];
        integ[i] = v.amplitude_profile(std::min(r, v.R0)) * prof(i) * r * r;
    }
    return 4.0 * M_PI * lambda * simpson_uniform(integ, step);
}

template <class FAt>
inline EffectiveKernel build_scaled(const RegimeParams& params, const RadialPotential& v,
                                    const FAt& f_at, double kernel_mass, const Grid& grid) {
    if (grid.dim != 3)
        throw UnresolvedKernel("scaled kernel is a 3D radial object; use delta mode in d < 3");
    const double S = params.scale();
    const double support = v.R0 / S;
    if (support < 4.0 * grid.h())
        throw UnresolvedKernel("rescaled support " + std::to_string(support) + " spans < 4 cells");
    if (2.0 * support > grid.box)
        throw UnresolvedKernel("rescaled support does not fit in the periodic box");
    EffectiveKernel k;
    k.mode = EffectiveKernel::Mode::Scaled;
    k.grid = grid;
    k.integral = kernel_mass;
    const double lambda = params.lambda();
    const double amp = lambda * S * S * S;
    std::vector<cplx> tab(grid.size(), cplx(0.0, 0.0));
    for_each_node(grid, [&](std::size_t idx, const std::array<int, 3>& kk) {
        double r2 = 0.0;
        for (int d = 0; d < 3; ++d) {
            double x = grid.coord(kk[d]);
            if (x > grid.box / 2) x -= grid.box;  // minimum image
            r2 += x * x;
        }
        const double s = S * std::sqrt(r2);
        if (s < v.R0) {
            const double val = amp * v.amplitude_profile(s) * f_at(s);
            if (val < 0.0) throw InvalidPotential("negative kernel sample");
            tab[idx] = val;
        }
    });
    fft_forward(grid, tab);
    k.fourier_multiplier.resize(tab.size());
    // real even kernel: multiplier is K-hat * cell volume (discrete convolution weight)
    for (std::size_t i = 0; i < tab.size(); ++i)
        k.fourier_multiplier[i] = tab[i].real() * grid.cell_volume();
    return k;
}

} // namespace detail

/// Scaled kernel from the Dirichlet scattering profile (HD regime rule).
inline EffectiveKernel build_effective_kernel(const RegimeParams& params,
                                              const RadialPotential& v,
                                              const ScatteringSolution& sol, const Grid& grid) {
    if (std::fabs(sol.mu - params.mu()) > 1e-9 * std::max(1.0, params.mu()))
        throw GridMismatch("scattering input solved at a different mu");
    const double mass = detail::radial_kernel_mass(
        v, [&](std::size_t i) { return sol.f_values[i]; }, params.lambda(), sol.step, sol.i_R0,
        sol.r_grid);
    return detail::build_scaled(params, v, [&](double s) { return sol.f_at(s); }, mass, grid);
}

/// Scaled kernel from the Neumann profile (GP/BGP/SGP/HC regime rule).
inline EffectiveKernel build_effective_kernel(const RegimeParams& params,
                                              const RadialPotential& v,
                                              const NeumannGroundState& gs, const Grid& grid) {
    if (std::fabs(gs.mu - params.mu()) > 1e-9 * std::max(1.0, params.mu()))
        throw GridMismatch("Neumann input solved at a different mu");
    const double mass = detail::radial_kernel_mass(
        v, [&](std::size_t i) { return gs.f_values[i]; }, params.lambda(), gs.step, gs.i_R0,
        gs.r_grid);
    return detail::build_scaled(params, v, [&](double s) { return gs.f_at(s); }, mass, grid);
}

/// Delta-mode kernel with the exact coupling g = 4 pi mu_tilde a0.
inline EffectiveKernel delta_kernel(const RegimeParams& params, const ScatteringSolution& sol) {
    if (std::fabs(sol.mu - params.mu()) > 1e-9 * std::max(1.0, params.mu()))
        throw GridMismatch("scattering input solved at a different mu");
    EffectiveKernel k;
    k.mode = EffectiveKernel::Mode::Delta;
    k.g = 4.0 * M_PI * params.mu_tilde() * sol.a0;
    k.integral = k.g;
    return k;
}

/// Delta-mode kernel with explicit coupling (e.g. zero-interaction runs).
inline EffectiveKernel delta_kernel(double g) {
    EffectiveKernel k;
    k.mode = EffectiveKernel::Mode::Delta;
    k.g = g;
    k.integral = g;
    return k;
}

} // namespace beclab
