#pragma once

// Behavioural model of the multiplier/amplifier cascade that generates
// s(t) = prod_i cos(2 pi f_base a_i t). Every stage is memoryless except the
// optional bandwidth pole, which is applied in the frequency domain over a
// grid spanning a whole number of alignment periods.

#include "cpi/error.hpp"
#include "cpi/fft.hpp"
#include "cpi/instances.hpp"
#include "cpi/rng.hpp"
#include "cpi/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cpi {

enum class BandwidthModel { None, OnePole, HardCutoff };
enum class BandwidthPlacement { Output, Inputs };

/// Per-stage lists follow one rule: empty means the fallback, a single entry
/// applies to every stage, otherwise entry k belongs to stage k and missing
/// entries take the fallback.
inline double per_stage(const std::vector<double>& v, std::size_t k, double fallback) {
    if (v.empty()) return fallback;
    if (v.size() == 1) return v.front();
    return k < v.size() ? v[k] : fallback;
}

/// Every analogue imperfection knob of the signal chain.
struct NonidealityConfig {
    double f_base = 10'000.0;  ///< Hz per instance unit
    double supply_voltage = 10.0;
    std::vector<double> source_amplitude{1.0};  ///< per source
    double mult_scale = 0.1;                    ///< x*y/10 multiplier law
    std::vector<double> mult_output_offset;     ///< per stage
    std::vector<double> mult_input_offset;      ///< per stage, added to both inputs
    std::vector<double> z_compensation;         ///< per stage, Z-pin voltage
    std::vector<double> amp_gain{10.0};         ///< per stage
    std::vector<double> amp_offset;             ///< per stage
    double output_gain = 1.0;                   ///< final amplifier after the chain
    BandwidthModel bandwidth_model = BandwidthModel::OnePole;
    BandwidthPlacement bandwidth_placement = BandwidthPlacement::Output;
    double bandwidth_f_star = 120'000.0;
    double freq_error_sigma = 0.0;   ///< relative
    double phase_error_sigma = 0.0;  ///< radians
    double noise_sigma = 0.0;        ///< volts per sample
    unsigned oversample = 16;        ///< grid points per period of f_max
    std::uint64_t seed = 0;

    /// No offsets, noise, errors or bandwidth limit; unit net gain per stage.
    static NonidealityConfig ideal() {
        NonidealityConfig c;
        c.bandwidth_model = BandwidthModel::None;
        return c;
    }

    void validate() const {
        if (!(f_base > 0)) throw InvalidInput("f_base must be positive");
        if (!(supply_voltage > 0)) throw InvalidInput("supply_voltage must be positive");
        if (oversample < 4) throw InvalidInput("oversample must be at least 4");
        if (!(bandwidth_f_star > 0)) throw InvalidInput("bandwidth_f_star must be positive");
        if (freq_error_sigma < 0 || phase_error_sigma < 0 || noise_sigma < 0)
            throw InvalidInput("error scales must be non-negative");
    }
};

/// Where on the simulated time axis the record is taken, in alignment
/// periods. The defaults reproduce a 1.2 ms burn-in and a 3 ms stop at
/// gcd = 1, f_base = 10 kHz, sampled every 2 us.
struct SamplingPlan {
    double burn_in_periods = 12.0;
    double record_periods = 18.0;
    double tau = 2e-6;

    std::size_t simulated_periods() const {
        return static_cast<std::size_t>(std::ceil(burn_in_periods + record_periods - 1e-9));
    }
};

/// Cap on dense grid points per signal.
inline constexpr std::size_t kMaxGridPoints = std::size_t{1} << 23;

struct Grid {
    double period = 0.0;  ///< seconds
    std::size_t points_per_period = 0;
    std::size_t periods = 0;
    double f_max = 0.0;  ///< Hz

    double dt() const { return period / static_cast<double>(points_per_period); }
    std::size_t points() const { return points_per_period * periods; }
};

/// Dense grid resolving sum(a_i) * f_base with `oversample` points per
/// shortest period. When tau divides the alignment period, the grid is
/// refined so that every sampling instant is a grid point.
inline Grid make_grid(const CpiInstance& inst, const NonidealityConfig& cfg, const SamplingPlan& plan = {}) {
    cfg.validate();
    Grid g;
    g.period = 1.0 / (static_cast<double>(inst.gcd()) * cfg.f_base);
    g.f_max = static_cast<double>(inst.sum()) * cfg.f_base;
    g.periods = std::max<std::size_t>(1, plan.simulated_periods());
    const double lines_per_period = static_cast<double>(inst.sum() / inst.gcd());
    auto ppp = static_cast<std::size_t>(std::ceil(cfg.oversample * lines_per_period));
    ppp = std::max<std::size_t>(ppp, 8);
    if (plan.tau > 0) {
        const double ratio = g.period / plan.tau;
        const double q = std::round(ratio);
        if (q >= 1 && std::abs(ratio - q) < 1e-9 * ratio) {
            const auto qi = static_cast<std::size_t>(q);
            ppp = (ppp + qi - 1) / qi * qi;
        }
    }
    g.points_per_period = ppp;
    if (g.points() > kMaxGridPoints)
        throw SimulationError("simulation grid of " + std::to_string(g.points()) + " points exceeds the cap of " +
                              std::to_string(kMaxGridPoints));
    return g;
}

inline Signal blank_signal(const Grid& g) {
    Signal s;
    s.t0 = 0.0;
    s.dt = g.dt();
    s.samples.assign(g.points(), 0.0);
    s.f_max_nominal = g.f_max;
    s.align_period = g.period;
    return s;
}

/// Frequency and phase errors drawn for each source.
struct SourceErrors {
    std::vector<double> relative_freq;
    std::vector<double> phase;
};

inline SourceErrors draw_source_errors(std::size_t n, const NonidealityConfig& cfg) {
    SourceErrors e{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    std::mt19937_64 rng(sub_seed(cfg.seed, Stream::Sources));
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double de = unit(rng);
        const double dp = unit(rng);
        e.relative_freq[i] = cfg.freq_error_sigma * de;
        e.phase[i] = cfg.phase_error_sigma * dp;
    }
    return e;
}

/// Source i: amplitude * cos(2 pi f_base a_i (1 + eps_i) t + phi_i).
inline Signal synthesize_source(const CpiInstance& inst, const NonidealityConfig& cfg, const Grid& g,
                                const SourceErrors& err, std::size_t i) {
    Signal s = blank_signal(g);
    const double f = cfg.f_base * static_cast<double>(inst[i]) * (1.0 + err.relative_freq[i]);
    if (std::abs(f) * s.dt > 0.25)
        throw SimulationError("grid too coarse for source frequency " + std::to_string(f) + " Hz");
    const double amp = per_stage(cfg.source_amplitude, i, 1.0);
    const double w = 2.0 * M_PI * f;
    for (std::size_t k = 0; k < s.samples.size(); ++k) s.samples[k] = amp * std::cos(w * s.time(k) + err.phase[i]);
    return s;
}

inline std::vector<Signal> synthesize_sources(const CpiInstance& inst, const NonidealityConfig& cfg,
                                              const SamplingPlan& plan = {}) {
    const Grid g = make_grid(inst, cfg, plan);
    const auto err = draw_source_errors(inst.size(), cfg);
    double f_actual = 0.0;
    for (std::size_t i = 0; i < inst.size(); ++i)
        f_actual += cfg.f_base * static_cast<double>(inst[i]) * std::abs(1.0 + err.relative_freq[i]);
    if (f_actual * g.dt() > 0.25) throw SimulationError("grid too coarse for the perturbed f_max");
    std::vector<Signal> out;
    out.reserve(inst.size());
    for (std::size_t i = 0; i < inst.size(); ++i) out.push_back(synthesize_source(inst, cfg, g, err, i));
    return out;
}

/// Applies the configured bandwidth limit (zero-phase magnitude response).
inline void apply_bandwidth(Signal& s, const NonidealityConfig& cfg) {
    const double fs = cfg.bandwidth_f_star;
    switch (cfg.bandwidth_model) {
        case BandwidthModel::None:
            return;
        case BandwidthModel::OnePole:
            s.samples = fft::filter_real(s.samples, s.dt, [fs](double f) {
                const double r = f / fs;
                return 1.0 / std::sqrt(1.0 + r * r);
            });
            return;
        case BandwidthModel::HardCutoff:
            s.samples = fft::filter_real(s.samples, s.dt, [fs](double f) { return f > fs ? 0.0 : 1.0; });
            return;
    }
}

inline double clamp_rail(double v, double rail) { return std::clamp(v, -rail, rail); }

/// One four-quadrant multiplier: (x + in_off)(y + in_off) * scale plus output
/// offset, Z-pin voltage and noise, clamped to the rails, then band-limited.
inline Signal multiply_stage(const Signal& x, const Signal& y, const NonidealityConfig& cfg, std::size_t stage) {
    if (!same_grid(x, y)) throw SimulationError("multiply_stage: inputs are on different grids");
    const bool limit_inputs =
        cfg.bandwidth_model != BandwidthModel::None && cfg.bandwidth_placement == BandwidthPlacement::Inputs;
    Signal xin = x;
    Signal yin = y;
    if (limit_inputs) {
        apply_bandwidth(xin, cfg);
        apply_bandwidth(yin, cfg);
    }
    const double in_off = per_stage(cfg.mult_input_offset, stage, 0.0);
    const double additive = per_stage(cfg.mult_output_offset, stage, 0.0) + per_stage(cfg.z_compensation, stage, 0.0);
    Signal out = x.like();
    std::mt19937_64 rng(sub_seed(cfg.seed, Stream::Noise, stage));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t k = 0; k < out.samples.size(); ++k) {
        double v = (xin.samples[k] + in_off) * (yin.samples[k] + in_off) * cfg.mult_scale + additive;
        if (cfg.noise_sigma > 0) v += cfg.noise_sigma * noise(rng);
        out.samples[k] = clamp_rail(v, cfg.supply_voltage);
    }
    if (!limit_inputs) apply_bandwidth(out, cfg);
    return out;
}

/// Non-inverting amplifier between multipliers.
inline Signal amplify(const Signal& x, const NonidealityConfig& cfg, std::size_t stage = 0) {
    const double gain = per_stage(cfg.amp_gain, stage, 10.0);
    const double offset = per_stage(cfg.amp_offset, stage, 0.0);
    Signal out = x;
    for (auto& v : out.samples) v = clamp_rail(gain * v + offset, cfg.supply_voltage);
    return out;
}

struct PipelineTrace {
    Grid grid;
    /// Raw multiplier outputs (Z-pin node), one per stage.
    std::vector<Signal> multiplier_outputs;
    /// Outputs after each multiplier+amplifier pair; n-1 entries.
    std::vector<Signal> stage_outputs;
    Signal final;
    /// Set when sum(a_i) * f_base exceeds the multiplier bandwidth.
    bool bandwidth_warning = false;
};

/// Left fold s_1 = src_1, s_k = amplify(multiply(s_{k-1}, src_k)); the final
/// amplifier applies output_gain. With keep_stages false only `final` is
/// populated, which bounds memory for long chains.
inline PipelineTrace run_cascade(const CpiInstance& inst, const NonidealityConfig& cfg,
                                 const SamplingPlan& plan = {}, bool keep_stages = true) {
    PipelineTrace trace;
    trace.grid = make_grid(inst, cfg, plan);
    trace.bandwidth_warning = trace.grid.f_max > cfg.bandwidth_f_star;
    const auto err = draw_source_errors(inst.size(), cfg);
    double f_actual = 0.0;
    for (std::size_t i = 0; i < inst.size(); ++i)
        f_actual += cfg.f_base * static_cast<double>(inst[i]) * std::abs(1.0 + err.relative_freq[i]);
    if (f_actual * trace.grid.dt() > 0.25) throw SimulationError("grid too coarse for the perturbed f_max");

    Signal s = synthesize_source(inst, cfg, trace.grid, err, 0);
    for (std::size_t k = 1; k < inst.size(); ++k) {
        const Signal src = synthesize_source(inst, cfg, trace.grid, err, k);
        Signal m = multiply_stage(s, src, cfg, k - 1);
        s = amplify(m, cfg, k - 1);
        if (keep_stages) {
            trace.multiplier_outputs.push_back(std::move(m));
            trace.stage_outputs.push_back(s);
        }
    }
    for (auto& v : s.samples) v = clamp_rail(cfg.output_gain * v, cfg.supply_voltage);
    trace.final = std::move(s);
    return trace;
}

/// Gain a unit-amplitude ideal product picks up along the chain: source
/// amplitudes, per-stage scale*gain and the output amplifier.
inline double nominal_chain_gain(std::size_t n, const NonidealityConfig& cfg) {
    double g = cfg.output_gain;
    for (std::size_t i = 0; i < n; ++i) g *= per_stage(cfg.source_amplitude, i, 1.0);
    for (std::size_t k = 0; k + 1 < n; ++k) g *= cfg.mult_scale * per_stage(cfg.amp_gain, k, 10.0);
    return g;
}

}  // namespace cpi
