#pragma once

// Low-pass filtering, alignment-snapped sampling and DC extraction.

#include "cpi/error.hpp"
#include "cpi/fft.hpp"
#include "cpi/signal.hpp"
#include "cpi/spectrum.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace cpi {

enum class FilterKind { None, Brickwall, OnePoleCascade };

struct FilterSpec {
    FilterKind kind = FilterKind::Brickwall;
    double cutoff_f0 = 5'000.0;  ///< Hz
    unsigned order = 1;
    double per_stage_gain = 1.0;
    /// Apply g/(1 + j f/f0) per stage instead of its magnitude.
    bool complex_response = false;

    double dc_gain() const {
        return kind == FilterKind::None ? 1.0 : std::pow(per_stage_gain, static_cast<double>(order));
    }

    void validate() const {
        if (kind == FilterKind::None) return;
        if (!(cutoff_f0 > 0)) throw InvalidInput("filter cutoff must be positive");
        if (order < 1) throw InvalidInput("filter order must be at least 1");
    }
};

/// n-th order chain of first-order sections with gain 2 each, so the DC
/// line of an n-fold product (weight 1/2^n per sign vector) is scaled back
/// by 2^n while harmonics above f0 are damped.
inline FilterSpec design_compensating_filter(unsigned n, double f0) {
    if (n < 1) throw InvalidInput("compensating filter needs n >= 1");
    return FilterSpec{FilterKind::OnePoleCascade, f0, n, 2.0, false};
}

/// Filters on the dense grid in the frequency domain. Brickwall keeps bins
/// strictly below f0; both kinds scale DC by per_stage_gain^order.
inline Signal apply_lowpass(const Signal& sig, const FilterSpec& spec) {
    spec.validate();
    Signal out = sig;
    if (spec.kind == FilterKind::None || sig.samples.empty()) return out;
    const double f0 = spec.cutoff_f0;
    const double gain = spec.dc_gain();
    const double order = static_cast<double>(spec.order);
    if (spec.kind == FilterKind::Brickwall) {
        out.samples = fft::filter_real(sig.samples, sig.dt, [=](double f) { return f < f0 ? gain : 0.0; });
    } else if (spec.complex_response) {
        const double g = spec.per_stage_gain;
        out.samples = fft::filter_real(sig.samples, sig.dt, [=](double f) {
            return std::pow(std::complex<double>(g, 0.0) / std::complex<double>(1.0, f / f0), order);
        });
    } else {
        out.samples = fft::filter_real(sig.samples, sig.dt, [=](double f) {
            const double r = f / f0;
            return gain * std::pow(1.0 + r * r, -0.5 * order);
        });
    }
    return out;
}

/// Equidistant record (t_i, y_i), t_i = t_start + i * tau.
struct SampledTrace {
    double t_start = 0.0;
    double tau = 0.0;
    std::vector<double> values;
    /// How far t_start was moved to reach an alignment instant.
    double snap_distance = 0.0;
    /// True when the values were interpolated from a non-uniform source.
    bool resampled = false;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return t_start + static_cast<double>(i) * tau; }
};

namespace detail {

/// Trigonometric interpolation of a periodic band-limited grid signal.
class FourierInterpolator {
public:
    explicit FourierInterpolator(const Signal& s) : sig_(s), bins_(fft::forward_real(s.samples)) {}

    double operator()(double t) const {
        const std::size_t n = sig_.samples.size();
        const double x = (t - sig_.t0) / sig_.dt;  // position in samples
        const std::complex<double> step = std::polar(1.0, 2.0 * M_PI * x / static_cast<double>(n));
        std::complex<double> rot = step;
        double acc = bins_[0].real();
        const std::size_t half = n / 2;
        for (std::size_t k = 1; k < bins_.size(); ++k) {
            const double term = (bins_[k] * rot).real();
            acc += (n % 2 == 0 && k == half) ? term : 2.0 * term;
            rot *= step;
        }
        return acc / static_cast<double>(n);
    }

private:
    const Signal& sig_;
    fft::Bins bins_;
};

}  // namespace detail

/// Samples an (already filtered) signal for `duration` seconds.
///
/// tau is the requested step, clamped to 1/(2 f0) for real filters; with no
/// request it defaults to 1/(2 f0), or the grid step for FilterKind::None.
/// t_start snaps to the nearest alignment instant of the signal. Instants
/// that fall between grid points are evaluated by Fourier interpolation.
inline SampledTrace sample_after_filter(const Signal& sig, const FilterSpec& spec, double t_start, double duration,
                                        double requested_tau = 0.0) {
    if (t_start < 0) throw InvalidInput("sampling start must be non-negative");
    if (sig.samples.empty()) throw InvalidInput("cannot sample an empty signal");
    double tau = 0.0;
    if (spec.kind == FilterKind::None) {
        tau = requested_tau > 0 ? requested_tau : sig.dt;
    } else {
        const double nyquist_step = 1.0 / (2.0 * spec.cutoff_f0);
        tau = requested_tau > 0 ? std::min(requested_tau, nyquist_step) : nyquist_step;
    }

    SampledTrace tr;
    tr.tau = tau;
    tr.t_start = t_start;
    if (sig.align_period > 0) {
        if (duration < sig.align_period * (1.0 - 1e-9))
            throw InvalidInput("sampling duration is shorter than one alignment period");
        const double snapped = std::round(t_start / sig.align_period) * sig.align_period;
        tr.snap_distance = snapped - t_start;
        tr.t_start = snapped;
    }
    const double steps = duration / tau;
    const auto m = static_cast<std::size_t>(std::floor(steps * (1.0 + 1e-7)));
    if (m < 1) throw InvalidInput("sampling duration shorter than one step");
    // A grid spanning whole alignment periods is periodic, so instants up to
    // the end of its last interval are defined.
    const bool periodic = sig.align_period > 0;
    const double t_last = tr.t_start + static_cast<double>(m - 1) * tau;
    const double t_end = periodic ? sig.t0 + sig.duration() : sig.time(sig.samples.size() - 1);
    if (t_last > t_end + 1e-9 * sig.dt)
        throw SimulationError("sampling window ends after the simulated span");

    std::optional<detail::FourierInterpolator> interp;
    tr.values.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = tr.time(i);
        const double pos = (t - sig.t0) / sig.dt;
        const double nearest = std::round(pos);
        if (std::abs(pos - nearest) < 1e-6) {
            tr.values[i] = sig.samples[static_cast<std::size_t>(nearest) % sig.samples.size()];
        } else {
            if (!interp) interp.emplace(sig);
            tr.values[i] = (*interp)(t);
        }
    }
    return tr;
}

/// The DC estimate: arithmetic mean of the samples.
inline double dc_component(const SampledTrace& tr) {
    if (tr.values.empty()) throw InvalidInput("dc_component of an empty trace");
    return std::accumulate(tr.values.begin(), tr.values.end(), 0.0) / static_cast<double>(tr.values.size());
}

/// Two-sided amplitude spectrum in Hz, |X_k|/m per line; the DC line is the
/// signed sample mean.
inline Spectrum dft(const SampledTrace& tr) {
    const std::size_t m = tr.values.size();
    if (m < 2) throw InvalidInput("dft needs at least two samples");
    const auto bins = fft::forward_real(tr.values);
    Spectrum s;
    s.unit = FrequencyUnit::Hertz;
    s.resolution = 1.0 / (static_cast<double>(m) * tr.tau);
    s.lines[0.0] = dc_component(tr);
    const double md = static_cast<double>(m);
    for (std::size_t k = 1; k < bins.size(); ++k) {
        const double f = static_cast<double>(k) * s.resolution;
        const double a = std::abs(bins[k]) / md;
        s.lines[f] = a;
        if (!(m % 2 == 0 && k == m / 2)) s.lines[-f] = a;
    }
    return s;
}

}  // namespace cpi
