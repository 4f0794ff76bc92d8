#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "beclab/errors.hpp"

namespace beclab {

using cplx = std::complex<double>;

/// Periodic cubic grid: n points per axis on a torus of period `box`.
struct Grid {
    int dim = 1;
    int n = 0;       // points per axis, power of two
    double box = 2.0 * M_PI;

    std::size_t size() const {
        std::size_t s = 1;
        for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(n);
        return s;
    }
    double h() const { return box / n; }
    double cell_volume() const { return std::pow(h(), dim); }
    double volume() const { return std::pow(box, dim); }

    /// Fourier wavenumber of index k along one axis.
    double freq(int k) const {
        const int kk = k <= n / 2 ? k : k - n;
        return 2.0 * M_PI * kk / box;
    }

    /// Physical coordinate of index i along one axis, in [0, box).
    double coord(int i) const { return box * i / n; }

    bool operator==(const Grid& o) const { return dim == o.dim && n == o.n && box == o.box; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

namespace detail {

// Cached FFTW plans with a scratch buffer; FFTW planning is not thread-safe,
// and executing through the owned scratch keeps alignment guarantees trivial.
class FftCache {
  public:
    static FftCache& instance() {
        static FftCache c;
        return c;
    }

    void transform(const Grid& g, cplx* data, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(g.dim, g.n, sign);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            Entry e;
            e.buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * g.size()));
            switch (g.dim) {
                case 1: e.plan = fftw_plan_dft_1d(g.n, e.buf, e.buf, sign, FFTW_ESTIMATE); break;
                case 2:
                    e.plan = fftw_plan_dft_2d(g.n, g.n, e.buf, e.buf, sign, FFTW_ESTIMATE);
                    break;
                case 3:
                    e.plan = fftw_plan_dft_3d(g.n, g.n, g.n, e.buf, e.buf, sign, FFTW_ESTIMATE);
                    break;
                default: throw GridMismatch("grid dim must be 1, 2, or 3");
            }
            it = plans_.emplace(key, e).first;
        }
        auto& e = it->second;
        std::memcpy(e.buf, data, sizeof(cplx) * g.size());
        fftw_execute(e.plan);
        std::memcpy(data, e.buf, sizeof(cplx) * g.size());
    }

  private:
    struct Entry {
        fftw_plan plan = nullptr;
        fftw_complex* buf = nullptr;
    };
    std::map<std::tuple<int, int, int>, Entry> plans_;
    std::mutex mutex_;
    FftCache() = default;
    ~FftCache() {
        for (auto& [k, e] : plans_) {
            fftw_destroy_plan(e.plan);
            fftw_free(e.buf);
        }
    }
};

} // namespace detail

inline void fft_forward(const Grid& g, std::vector<cplx>& v) {
    detail::FftCache::instance().transform(g, v.data(), FFTW_FORWARD);
}

inline void fft_inverse(const Grid& g, std::vector<cplx>& v) {
    detail::FftCache::instance().transform(g, v.data(), FFTW_BACKWARD);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (auto& x : v) x *= inv;
}

/// Visit every node: f(flat_index, k_indices[dim]).
template <class F>
inline void for_each_node(const Grid& g, F&& f) {
    std::array<int, 3> k{0, 0, 0};
    const std::size_t total = g.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        f(idx, k);
        for (int d = g.dim - 1; d >= 0; --d) {
            if (++k[d] < g.n) break;
            k[d] = 0;
        }
    }
}

/// Spectral gradient component d/dx_axis as a new complex field.
inline std::vector<cplx> spectral_derivative(const Grid& g, const std::vector<cplx>& v,
                                             int axis) {
    std::vector<cplx> w = v;
    fft_forward(g, w);
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        w[idx] *= cplx(0.0, g.freq(k[axis]));
    });
    fft_inverse(g, w);
    return w;
}

inline std::vector<cplx> spectral_laplacian(const Grid& g, const std::vector<cplx>& v) {
    std::vector<cplx> w = v;
    fft_forward(g, w);
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            const double f = g.freq(k[d]);
            k2 += f * f;
        }
        w[idx] *= -k2;
    });
    fft_inverse(g, w);
    return w;
}

inline double grid_integral_real(const Grid& g, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s * g.cell_volume();
}

inline double l2_norm_real(const Grid& g, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s * g.cell_volume());
}

inline double l1_norm_real(const Grid& g, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s * g.cell_volume();
}

/// H^s norm with the eps-independent weight <xi>^s.
inline double hs_norm(const Grid& g, const std::vector<cplx>& v, double s) {
    std::vector<cplx> w = v;
    fft_forward(g, w);
    double acc = 0.0;
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            const double f = g.freq(k[d]);
            k2 += f * f;
        }
        acc += std::pow(1.0 + k2, s) * std::norm(w[idx]);
    });
    // DFT coefficients c_xi = w/size; ||v||^2 = vol * sum |c_xi|^2
    return std::sqrt(acc * g.volume()) / static_cast<double>(g.size());
}

} // namespace beclab
