#pragma once

#include <cmath>
#include <string>

#include "beclab/errors.hpp"
#include "beclab/scattering.hpp"

namespace beclab {

enum class Regime { GP, HC, BGP, SGP, HD };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::GP: return "GP";
        case Regime::HC: return "HC";
        case Regime::BGP: return "BGP";
        case Regime::SGP: return "SGP";
        case Regime::HD: return "HD";
    }
    return "?";
}

/// Scaling tuple (N, eps, beta, kappa, alpha) with every derived parameter of
/// the regime dictionary exposed read-only.
struct RegimeParams {
    double N = 1000.0;   // enters only through lambda and scale factors
    double eps = 0.5;    // semiclassical parameter in (0, 1]
    double beta = 1.0;   // >= 1
    double kappa = 1.0;  // in [0, 1]
    double alpha = 0.0;  // in [0, 1)

    RegimeParams() = default;
    RegimeParams(double N_, double eps_, double beta_, double kappa_, double alpha_)
        : N(N_), eps(eps_), beta(beta_), kappa(kappa_), alpha(alpha_) {
        if (!(N >= std::exp(1.0))) throw ConfigInvalid("RegimeParams: N must be >= e");
        if (!(eps > 0.0 && eps <= 1.0)) throw ConfigInvalid("RegimeParams: eps in (0, 1]");
        if (!(beta >= 1.0)) throw ConfigInvalid("RegimeParams: beta >= 1");
        if (!(kappa >= 0.0 && kappa <= 1.0)) throw ConfigInvalid("RegimeParams: kappa in [0, 1]");
        if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigInvalid("RegimeParams: alpha in [0, 1)");
    }

    double lambda() const { return std::pow(std::log(N), alpha); }
    double mu_tilde() const { return std::pow(N, 1.0 - beta) * std::pow(eps, 2.0 * (1.0 - kappa)); }
    double mu() const { return mu_tilde() / lambda(); }
    double scale() const { return std::pow(N, beta) * std::pow(eps, 2.0 * kappa); }  // N^b e^2k
    double ell() const { return std::pow(eps, 4.0); }
    double L() const { return scale() * ell(); }

    Regime regime() const {
        if (beta > 1.0) return Regime::HD;
        if (kappa == 1.0) return alpha == 0.0 ? Regime::GP : Regime::HC;
        if (kappa == 0.0) return Regime::SGP;
        return Regime::BGP;
    }
};

/// Rescaled scattering data: a_N = a0 / (N^beta eps^2 kappa), the invariant
/// product N a_N eps^2 = mu_tilde a0, the limit target mu_tilde c0, and the
/// relative deviation eta(mu) = c0 - a0.
struct RescaledScatteringData {
    double a_N = 0.0;
    double N_aN_eps2 = 0.0;
    double target = 0.0;
    double deviation = 0.0;  // |N a_N eps^2 - mu_tilde c0| / mu_tilde
};

inline RescaledScatteringData rescaled_scattering_data(const RegimeParams& params,
                                                       const ScatteringSolution& base,
                                                       double c0) {
    if (std::fabs(base.mu - params.mu()) > 1e-9 * std::max(1.0, params.mu()))
        throw GridMismatch("scattering solution solved at a different mu than params");
    RescaledScatteringData out;
    out.a_N = base.a0 / params.scale();
    out.N_aN_eps2 = params.mu_tilde() * base.a0;
    out.target = params.mu_tilde() * c0;
    out.deviation = std::fabs(out.N_aN_eps2 - out.target) / params.mu_tilde();
    return out;
}

} // namespace beclab
