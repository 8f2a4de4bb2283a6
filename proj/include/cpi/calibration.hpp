#pragma once

// Offset measurement and Z-pin compensation, probable-NO perturbation,
// bootstrapped thresholds and the final DC-based decision.

#include "cpi/analog_pipeline.hpp"
#include "cpi/dsp.hpp"
#include "cpi/error.hpp"
#include "cpi/exact_oracle.hpp"
#include "cpi/instances.hpp"
#include "cpi/rng.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace cpi {

/// Record window of a plan for a given grid.
struct RecordWindow {
    double t_start;
    double duration;
};

inline RecordWindow record_window(const Grid& g, const SamplingPlan& plan) {
    return {plan.burn_in_periods * g.period, plan.record_periods * g.period};
}

/// Result of pushing one instance through cascade, filter and sampler.
struct PipelineRun {
    double dc = 0.0;
    SampledTrace trace;
    bool bandwidth_warning = false;
};

inline PipelineRun run_pipeline(const CpiInstance& inst, const NonidealityConfig& cfg, const FilterSpec& spec,
                                const SamplingPlan& plan = {}) {
    const auto cascade = run_cascade(inst, cfg, plan, /*keep_stages=*/false);
    const Signal filtered = apply_lowpass(cascade.final, spec);
    const auto win = record_window(cascade.grid, plan);
    PipelineRun run;
    run.trace = sample_after_filter(filtered, spec, win.t_start, win.duration, plan.tau);
    run.dc = dc_component(run.trace);
    run.bandwidth_warning = cascade.bandwidth_warning;
    return run;
}

struct OffsetReport {
    /// DC at each multiplier output (the Z-pin node), one per stage.
    std::vector<double> per_stage_dc;
    CpiInstance instance_used;
    bool is_no_instance = true;
};

/// Runs the cascade and measures the DC at every multiplier output over the
/// record window. Meaningful on NO-instances only, where every stage mean
/// of the ideal chain vanishes; `is_no_instance` flags misuse.
inline OffsetReport measure_stage_offsets(const CpiInstance& inst, const NonidealityConfig& cfg,
                                          const SamplingPlan& plan = {}) {
    const auto cascade = run_cascade(inst, cfg, plan);
    const auto win = record_window(cascade.grid, plan);
    const FilterSpec raw{FilterKind::None};
    OffsetReport rep{{}, inst, !decide_exact(inst)};
    for (const auto& m : cascade.multiplier_outputs)
        rep.per_stage_dc.push_back(dc_component(sample_after_filter(m, raw, win.t_start, win.duration, plan.tau)));
    return rep;
}

/// Subtracts the measured residual from each stage's Z-pin voltage. Starting
/// from an uncompensated config this sets z_k = -dc_k; applied to a report
/// measured on an already compensated config it refines the previous values.
inline NonidealityConfig compensate(const NonidealityConfig& cfg, const OffsetReport& report) {
    const std::size_t stages = report.per_stage_dc.size();
    if (cfg.z_compensation.size() > 1 && cfg.z_compensation.size() != stages)
        throw InvalidInput("compensate: report has " + std::to_string(stages) + " stages, config has " +
                           std::to_string(cfg.z_compensation.size()));
    NonidealityConfig out = cfg;
    out.z_compensation.resize(stages);
    for (std::size_t k = 0; k < stages; ++k)
        out.z_compensation[k] = per_stage(cfg.z_compensation, k, 0.0) - report.per_stage_dc[k];
    return out;
}

/// P(|N(0, n sigma^2)| <= delta).
inline double false_dc_probability(std::size_t n, double sigma, double delta) {
    return std::erf(delta / (sigma * std::sqrt(2.0 * static_cast<double>(n))));
}

struct PerturbedInstance {
    std::vector<double> frequencies;
    double p_false_dc = 0.0;
};

/// a_i + eps_i with eps_i ~ N(0, sigma^2): a NO-instance with probability one,
/// whose DC line lands within delta of zero with probability p_false_dc.
inline PerturbedInstance perturb_to_no_instance(const CpiInstance& inst, double sigma, double delta,
                                                std::uint64_t seed) {
    if (!(sigma > 0)) throw InvalidInput("perturb_to_no_instance: sigma must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, sigma);
    PerturbedInstance out;
    for (auto a : inst.values()) out.frequencies.push_back(static_cast<double>(a) + eps(rng));
    out.p_false_dc = false_dc_probability(inst.size(), sigma, delta);
    return out;
}

enum class CutRule { GeometricMean, Midpoint };

struct DecisionThreshold {
    double cut = 0.0;
    double no_band_max = 0.0;
    double yes_band_min = 0.0;
    std::size_t training_size = 0;
    bool separable = false;
};

/// Geometric means need a positive lower band; it is floored at this
/// fraction of the YES band so a vanishing NO band keeps the cut finite.
inline constexpr double kNoBandFloor = 1e-3;

inline double place_cut(double no_max, double yes_min, CutRule rule) {
    if (rule == CutRule::Midpoint || yes_min <= 0) return 0.5 * (no_max + yes_min);
    const double lo = std::max(no_max, kNoBandFloor * yes_min);
    return std::sqrt(lo * yes_min);
}

/// Threshold for a chain whose only error is the scale: half of the smallest
/// possible YES line 1/2^n, times the nominal chain and filter gain.
inline DecisionThreshold nominal_threshold(std::size_t n, const NonidealityConfig& cfg, const FilterSpec& spec) {
    const double scale = nominal_chain_gain(n, cfg) * spec.dc_gain();
    const double unit = std::ldexp(scale, -static_cast<int>(n));
    return DecisionThreshold{0.5 * unit, 0.0, 2.0 * unit, 0, true};
}

/// Learns DC bands from labelled training runs. Labels are verified with the
/// exact solver first.
inline DecisionThreshold bootstrap_threshold(const std::vector<CpiInstance>& train_yes,
                                             const std::vector<CpiInstance>& train_no, const NonidealityConfig& cfg,
                                             const FilterSpec& spec, const SamplingPlan& plan = {},
                                             CutRule rule = CutRule::GeometricMean) {
    if (train_yes.empty() || train_no.empty()) throw InvalidInput("bootstrap needs YES and NO training instances");
    std::string mislabelled;
    for (const auto& i : train_yes)
        if (!decide_exact(i)) mislabelled += " [" + to_string(i) + "] is not YES;";
    for (const auto& i : train_no)
        if (decide_exact(i)) mislabelled += " [" + to_string(i) + "] is not NO;";
    if (!mislabelled.empty()) throw InvalidInput("training label verification failed:" + mislabelled);

    DecisionThreshold thr;
    thr.training_size = train_yes.size() + train_no.size();
    thr.no_band_max = -HUGE_VAL;
    thr.yes_band_min = HUGE_VAL;
    for (const auto& i : train_no) thr.no_band_max = std::max(thr.no_band_max, run_pipeline(i, cfg, spec, plan).dc);
    for (const auto& i : train_yes)
        thr.yes_band_min = std::min(thr.yes_band_min, run_pipeline(i, cfg, spec, plan).dc);
    thr.separable = thr.no_band_max < thr.yes_band_min;
    thr.cut = thr.separable ? place_cut(thr.no_band_max, thr.yes_band_min, rule)
                            : 0.5 * (thr.no_band_max + thr.yes_band_min);
    return thr;
}

struct Decision {
    Answer answer = Answer::No;
    double dc_measured = 0.0;
    DecisionThreshold threshold;
    double margin = 0.0;
    bool bandwidth_warning = false;
};

/// YES iff the measured DC exceeds the cut: a balanced split contributes
/// the only zero-frequency line of the product.
inline Decision decide_from_dc(double dc, const DecisionThreshold& thr) {
    if (!thr.separable) throw InvalidInput("decision threshold is not separable");
    Decision d;
    d.dc_measured = dc;
    d.threshold = thr;
    d.answer = dc > thr.cut ? Answer::Yes : Answer::No;
    d.margin = std::abs(dc - thr.cut);
    return d;
}

/// Cascade, low-pass, sampling, DC and comparison with the cut. In strict
/// mode an instance beyond the multiplier bandwidth is rejected.
inline Decision decide_analog(const CpiInstance& inst, const NonidealityConfig& cfg, const FilterSpec& spec,
                              const DecisionThreshold& thr, const SamplingPlan& plan = {}, bool strict = false) {
    if (!thr.separable) throw InvalidInput("decision threshold is not separable");
    const auto run = run_pipeline(inst, cfg, spec, plan);
    if (strict && run.bandwidth_warning)
        throw SimulationError("instance spans " + std::to_string(inst.sum() * cfg.f_base) +
                              " Hz, beyond the multiplier bandwidth");
    auto d = decide_from_dc(run.dc, thr);
    d.bandwidth_warning = run.bandwidth_warning;
    return d;
}

}  // namespace cpi
