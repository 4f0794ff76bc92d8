#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "beclab/errors.hpp"
#include "beclab/grid.hpp"
#include "beclab/kernel.hpp"

namespace beclab {

/// Periodic-grid complex wavefunction with its semiclassical parameter.
struct WaveField {
    Grid grid;
    double eps = 1.0;
    std::vector<cplx> values;

    static WaveField from_function(const Grid& g, double eps,
                                   const std::function<cplx(double, double, double)>& f) {
        WaveField w;
        w.grid = g;
        w.eps = eps;
        w.values.resize(g.size());
        for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
            w.values[idx] = f(g.coord(k[0]), g.dim > 1 ? g.coord(k[1]) : 0.0,
                              g.dim > 2 ? g.coord(k[2]) : 0.0);
        });
        return w;
    }

    double mass() const {
        double s = 0.0;
        for (const auto& z : values) s += std::norm(z);
        return s * grid.cell_volume();
    }

    void normalize() {
        const double m = mass();
        if (m <= 0.0) throw NaNDetected("cannot normalize a zero field");
        const double a = 1.0 / std::sqrt(m);
        for (auto& z : values) z *= a;
    }

    std::vector<double> density() const {
        std::vector<double> rho(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) rho[i] = std::norm(values[i]);
        return rho;
    }
};

/// Local density observables extracted spectrally from a wavefield.
struct DensityObservables {
    std::vector<double> rho;                  // |phi|^2
    std::array<std::vector<double>, 3> J;     // Im(eps grad phi conj(phi))
    std::vector<double> e_kin;                // 1/2 |eps grad phi|^2
    std::vector<double> e_int;                // 1/2 (K * rho) rho
    std::array<std::array<std::vector<double>, 3>, 3> sigma;  // Re(eps dj phi conj(eps dk phi))
    std::vector<double> P;                    // eps^2/4 Lap rho - 1/2 (K * rho) rho
};

inline DensityObservables observables(const WaveField& field, const EffectiveKernel& kernel) {
    const Grid& g = field.grid;
    const double eps = field.eps;
    DensityObservables obs;
    obs.rho = field.density();

    std::array<std::vector<cplx>, 3> dphi;
    for (int d = 0; d < g.dim; ++d) dphi[d] = spectral_derivative(g, field.values, d);

    obs.e_kin.assign(g.size(), 0.0);
    for (int d = 0; d < g.dim; ++d) {
        obs.J[d].resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const cplx grad_i = eps * dphi[d][i];
            obs.J[d][i] = std::imag(grad_i * std::conj(field.values[i]));
            obs.e_kin[i] += 0.5 * std::norm(grad_i);
        }
    }
    for (int a = 0; a < g.dim; ++a)
        for (int b = 0; b < g.dim; ++b) {
            obs.sigma[a][b].resize(g.size());
            for (std::size_t i = 0; i < g.size(); ++i)
                obs.sigma[a][b][i] =
                    eps * eps * std::real(dphi[a][i] * std::conj(dphi[b][i]));
        }

    const auto conv = kernel.convolve(g, obs.rho);
    obs.e_int.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) obs.e_int[i] = 0.5 * conv[i] * obs.rho[i];

    std::vector<cplx> rho_c(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) rho_c[i] = obs.rho[i];
    const auto lap_rho = spectral_laplacian(g, rho_c);
    obs.P.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        obs.P[i] = 0.25 * eps * eps * lap_rho[i].real() - obs.e_int[i];
    return obs;
}

} // namespace beclab
