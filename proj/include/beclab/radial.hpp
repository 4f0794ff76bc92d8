#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "beclab/errors.hpp"

namespace beclab {

/// Compactly supported nonnegative radial interaction profile.
///
/// v(r) = 0 for r >= R0, v(r) > 0 on [0, R0), bounded, and near the support
/// boundary v(r) = (R0 - r)^n * v1(r) with v1 bounded away from zero.
struct RadialPotential {
    std::function<double(double)> amplitude_profile;
    double R0 = 1.0;     // support radius
    double n = 0.0;      // vanishing order at the boundary
    double v_max = 1.0;  // sup of v, cached
    std::string kind;    // "constant" or "vanishing", for manifests

    double operator()(double r) const {
        return r < R0 ? amplitude_profile(r) : 0.0;
    }

    /// v = v0 on [0, R0).
    static RadialPotential constant(double v0, double R0) {
        if (v0 <= 0 || R0 <= 0) throw InvalidPotential("constant potential needs v0 > 0, R0 > 0");
        RadialPotential v;
        v.amplitude_profile = [v0](double) { return v0; };
        v.R0 = R0;
        v.n = 0.0;
        v.v_max = v0;
        v.kind = "constant";
        return v;
    }

    /// v(r) = v0 * (1 - r/R0)^n on [0, R0); sampled analytically, never by differencing.
    static RadialPotential vanishing(double v0, double R0, double n) {
        if (v0 <= 0 || R0 <= 0 || n < 0)
            throw InvalidPotential("vanishing potential needs v0 > 0, R0 > 0, n >= 0");
        if (n == 0.0) return constant(v0, R0);
        RadialPotential v;
        v.amplitude_profile = [v0, R0, n](double r) { return v0 * std::pow(1.0 - r / R0, n); };
        v.R0 = R0;
        v.n = n;
        v.v_max = v0;
        v.kind = "vanishing";
        return v;
    }

    /// The free case v = 0 (trivial scattering, a0 = 0).  Excluded from the
    /// positivity invariant but accepted by the solvers.
    static RadialPotential zero(double R0) {
        RadialPotential v;
        v.amplitude_profile = [](double) { return 0.0; };
        v.R0 = R0;
        v.n = 0.0;
        v.v_max = 0.0;
        v.kind = "zero";
        return v;
    }

    /// zeta0 = R0^2 * ||v||_inf, the boundary-layer scale of the scattering problem.
    double zeta0() const { return R0 * R0 * v_max; }
};

/// Composite Simpson on a uniform grid; values.size() must be odd (even interval count).
inline double simpson_uniform(const std::vector<double>& values, double h) {
    const std::size_t m = values.size();
    if (m < 3 || m % 2 == 0)
        throw GridMismatch("simpson_uniform needs an odd number of nodes, got " + std::to_string(m));
    double acc = values.front() + values.back();
    for (std::size_t i = 1; i + 1 < m; ++i) acc += values[i] * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Ordinary least-squares line fit; returns (slope, intercept).
inline std::pair<double, double> linear_fit(const std::vector<double>& x,
                                            const std::vector<double>& y) {
    const std::size_t m = x.size();
    if (m < 2 || y.size() != m) throw GridMismatch("linear_fit needs >= 2 matched points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / m};
}

} // namespace beclab
