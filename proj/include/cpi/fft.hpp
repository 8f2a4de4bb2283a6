#pragma once

// Thin RAII layer over FFTW's real-to-complex transforms. Planning is
// serialized because the FFTW planner is not thread-safe; execution is.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace cpi::fft {

namespace detail {

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FreeDeleter {
    void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using Buffer = std::unique_ptr<T[], FreeDeleter>;

template <class T>
Buffer<T> allocate(std::size_t n) {
    return Buffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1))));
}

}  // namespace detail

using Bins = std::vector<std::complex<double>>;

/// Unnormalized forward transform; returns bins 0..n/2.
inline Bins forward_real(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    auto in = detail::allocate<double>(n);
    auto out = detail::allocate<fftw_complex>(n / 2 + 1);
    detail::Plan plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute(plan.get());
    Bins bins(n / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = {out[k][0], out[k][1]};
    return bins;
}

/// Inverse of forward_real including the 1/n normalization.
inline std::vector<double> inverse_real(const Bins& bins, std::size_t n) {
    if (n == 0) return {};
    auto in = detail::allocate<fftw_complex>(n / 2 + 1);
    auto out = detail::allocate<double>(n);
    detail::Plan plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }
    for (std::size_t k = 0; k < n / 2 + 1; ++k) {
        in[k][0] = bins[k].real();
        in[k][1] = bins[k].imag();
    }
    fftw_execute(plan.get());
    std::vector<double> y(out.get(), out.get() + n);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : y) v *= scale;
    return y;
}

/// Frequency of bin k for n samples spaced dt apart (k <= n/2).
inline double bin_frequency(std::size_t k, std::size_t n, double dt) {
    return static_cast<double>(k) / (static_cast<double>(n) * dt);
}

/// Multiplies each bin by response(frequency) and transforms back.
template <class Response>
std::vector<double> filter_real(std::span<const double> x, double dt, Response&& response) {
    auto bins = forward_real(x);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] *= response(bin_frequency(k, x.size(), dt));
    return inverse_real(bins, x.size());
}

}  // namespace cpi::fft
