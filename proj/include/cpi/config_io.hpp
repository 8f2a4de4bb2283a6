#pragma once

// Flat key = value configuration files and calibration files.

#include "cpi/analog_pipeline.hpp"
#include "cpi/calibration.hpp"
#include "cpi/dsp.hpp"
#include "cpi/error.hpp"

#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cpi {

/// Everything a pipeline run depends on.
struct RunConfig {
    NonidealityConfig analog;
    FilterSpec filter;
    SamplingPlan plan;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw InvalidInput("config key '" + key + "': not a number: '" + v + "'");
    return d;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long d = 0;
    try {
        d = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-')
        throw InvalidInput("config key '" + key + "': not a non-negative integer: '" + v + "'");
    return d;
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt_double(v[i]);
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidInput("config key '" + key + "': not a boolean: '" + v + "'");
}

/// key = value lines, '#' comments; duplicate keys are rejected.
inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw InvalidInput("line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second) throw InvalidInput("duplicate config key '" + key + "'");
    }
    return kv;
}

}  // namespace detail

inline const char* to_string(BandwidthModel m) {
    switch (m) {
        case BandwidthModel::None: return "none";
        case BandwidthModel::OnePole: return "one-pole";
        case BandwidthModel::HardCutoff: return "hard-cutoff";
    }
    return "?";
}

inline const char* to_string(FilterKind k) {
    switch (k) {
        case FilterKind::None: return "none";
        case FilterKind::Brickwall: return "brickwall";
        case FilterKind::OnePoleCascade: return "one-pole";
    }
    return "?";
}

inline FilterKind parse_filter_kind(const std::string& v) {
    if (v == "none") return FilterKind::None;
    if (v == "brickwall" || v == "ideal-brickwall") return FilterKind::Brickwall;
    if (v == "one-pole" || v == "one-pole-cascade") return FilterKind::OnePoleCascade;
    throw InvalidInput("unknown filter kind '" + v + "'");
}

inline BandwidthModel parse_bandwidth_model(const std::string& v) {
    if (v == "none") return BandwidthModel::None;
    if (v == "one-pole") return BandwidthModel::OnePole;
    if (v == "hard-cutoff") return BandwidthModel::HardCutoff;
    throw InvalidInput("unknown bandwidth model '" + v + "'");
}

/// Applies every key of `text` on top of `base`. Unknown keys are errors.
inline RunConfig parse_run_config(std::string_view text, RunConfig base = {}) {
    using namespace detail;
    auto& a = base.analog;
    auto& f = base.filter;
    auto& p = base.plan;
    const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters{
        {"f_base", [&](auto& k, auto& v) { a.f_base = to_double(k, v); }},
        {"supply_voltage", [&](auto& k, auto& v) { a.supply_voltage = to_double(k, v); }},
        {"source_amplitude", [&](auto& k, auto& v) { a.source_amplitude = to_list(k, v); }},
        {"mult_scale", [&](auto& k, auto& v) { a.mult_scale = to_double(k, v); }},
        {"mult_output_offset", [&](auto& k, auto& v) { a.mult_output_offset = to_list(k, v); }},
        {"mult_input_offset", [&](auto& k, auto& v) { a.mult_input_offset = to_list(k, v); }},
        {"z_compensation", [&](auto& k, auto& v) { a.z_compensation = to_list(k, v); }},
        {"amp_gain", [&](auto& k, auto& v) { a.amp_gain = to_list(k, v); }},
        {"amp_offset", [&](auto& k, auto& v) { a.amp_offset = to_list(k, v); }},
        {"output_gain", [&](auto& k, auto& v) { a.output_gain = to_double(k, v); }},
        {"bandwidth_model", [&](auto&, auto& v) { a.bandwidth_model = parse_bandwidth_model(v); }},
        {"bandwidth_placement",
         [&](auto& k, auto& v) {
             if (v == "output") a.bandwidth_placement = BandwidthPlacement::Output;
             else if (v == "inputs") a.bandwidth_placement = BandwidthPlacement::Inputs;
             else throw InvalidInput("config key '" + k + "': expected output or inputs");
         }},
        {"bandwidth_f_star", [&](auto& k, auto& v) { a.bandwidth_f_star = to_double(k, v); }},
        {"freq_error_sigma", [&](auto& k, auto& v) { a.freq_error_sigma = to_double(k, v); }},
        {"phase_error_sigma", [&](auto& k, auto& v) { a.phase_error_sigma = to_double(k, v); }},
        {"noise_sigma", [&](auto& k, auto& v) { a.noise_sigma = to_double(k, v); }},
        {"oversample", [&](auto& k, auto& v) { a.oversample = static_cast<unsigned>(to_u64(k, v)); }},
        {"seed", [&](auto& k, auto& v) { a.seed = to_u64(k, v); }},
        {"kind", [&](auto&, auto& v) { f.kind = parse_filter_kind(v); }},
        {"cutoff_f0", [&](auto& k, auto& v) { f.cutoff_f0 = to_double(k, v); }},
        {"order", [&](auto& k, auto& v) { f.order = static_cast<unsigned>(to_u64(k, v)); }},
        {"per_stage_gain", [&](auto& k, auto& v) { f.per_stage_gain = to_double(k, v); }},
        {"complex_response", [&](auto& k, auto& v) { f.complex_response = to_bool(k, v); }},
        {"burn_in_periods", [&](auto& k, auto& v) { p.burn_in_periods = to_double(k, v); }},
        {"record_periods", [&](auto& k, auto& v) { p.record_periods = to_double(k, v); }},
        {"tau", [&](auto& k, auto& v) { p.tau = to_double(k, v); }},
    };
    for (const auto& [key, value] : parse_key_values(text)) {
        auto it = setters.find(key);
        if (it == setters.end()) throw InvalidInput("unknown config key '" + key + "'");
        it->second(key, value);
    }
    a.validate();
    f.validate();
    return base;
}

/// Canonical serialization; parse_run_config(to_config_text(c)) == c.
inline std::string to_config_text(const RunConfig& c) {
    using namespace detail;
    const auto& a = c.analog;
    std::ostringstream o;
    o << "f_base = " << fmt_double(a.f_base) << '\n'
      << "supply_voltage = " << fmt_double(a.supply_voltage) << '\n'
      << "source_amplitude = " << fmt_list(a.source_amplitude) << '\n'
      << "mult_scale = " << fmt_double(a.mult_scale) << '\n'
      << "mult_output_offset = " << fmt_list(a.mult_output_offset) << '\n'
      << "mult_input_offset = " << fmt_list(a.mult_input_offset) << '\n'
      << "z_compensation = " << fmt_list(a.z_compensation) << '\n'
      << "amp_gain = " << fmt_list(a.amp_gain) << '\n'
      << "amp_offset = " << fmt_list(a.amp_offset) << '\n'
      << "output_gain = " << fmt_double(a.output_gain) << '\n'
      << "bandwidth_model = " << to_string(a.bandwidth_model) << '\n'
      << "bandwidth_placement = " << (a.bandwidth_placement == BandwidthPlacement::Output ? "output" : "inputs")
      << '\n'
      << "bandwidth_f_star = " << fmt_double(a.bandwidth_f_star) << '\n'
      << "freq_error_sigma = " << fmt_double(a.freq_error_sigma) << '\n'
      << "phase_error_sigma = " << fmt_double(a.phase_error_sigma) << '\n'
      << "noise_sigma = " << fmt_double(a.noise_sigma) << '\n'
      << "oversample = " << a.oversample << '\n'
      << "seed = " << a.seed << '\n'
      << "kind = " << to_string(c.filter.kind) << '\n'
      << "cutoff_f0 = " << fmt_double(c.filter.cutoff_f0) << '\n'
      << "order = " << c.filter.order << '\n'
      << "per_stage_gain = " << fmt_double(c.filter.per_stage_gain) << '\n'
      << "complex_response = " << (c.filter.complex_response ? "true" : "false") << '\n'
      << "burn_in_periods = " << fmt_double(c.plan.burn_in_periods) << '\n'
      << "record_periods = " << fmt_double(c.plan.record_periods) << '\n'
      << "tau = " << fmt_double(c.plan.tau) << '\n';
    return o.str();
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(const RunConfig& c) { return fnv1a_hex(to_config_text(c)); }

/// Persisted result of a calibration run: the Z-pin values to apply and the
/// learned decision bands.
struct Calibration {
    DecisionThreshold threshold;
    std::vector<double> z_compensation;
    std::vector<double> measured_offsets;
};

inline std::string to_calibration_text(const Calibration& c) {
    using namespace detail;
    std::ostringstream o;
    o << "cut = " << fmt_double(c.threshold.cut) << '\n'
      << "no_band_max = " << fmt_double(c.threshold.no_band_max) << '\n'
      << "yes_band_min = " << fmt_double(c.threshold.yes_band_min) << '\n'
      << "training_size = " << c.threshold.training_size << '\n'
      << "separable = " << (c.threshold.separable ? "true" : "false") << '\n'
      << "z_compensation = " << fmt_list(c.z_compensation) << '\n'
      << "measured_offsets = " << fmt_list(c.measured_offsets) << '\n';
    return o.str();
}

inline Calibration parse_calibration(std::string_view text) {
    using namespace detail;
    const auto kv = parse_key_values(text);
    auto get = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw InvalidInput("calibration file lacks '" + k + "'");
        return it->second;
    };
    for (const auto& [k, v] : kv)
        if (k != "cut" && k != "no_band_max" && k != "yes_band_min" && k != "training_size" && k != "separable" &&
            k != "z_compensation" && k != "measured_offsets")
            throw InvalidInput("unknown calibration key '" + k + "'");
    Calibration c;
    c.threshold.cut = to_double("cut", get("cut"));
    c.threshold.no_band_max = to_double("no_band_max", get("no_band_max"));
    c.threshold.yes_band_min = to_double("yes_band_min", get("yes_band_min"));
    c.threshold.training_size = to_u64("training_size", get("training_size"));
    c.threshold.separable = to_bool("separable", get("separable"));
    if (kv.count("z_compensation")) c.z_compensation = to_list("z_compensation", kv.at("z_compensation"));
    if (kv.count("measured_offsets")) c.measured_offsets = to_list("measured_offsets", kv.at("measured_offsets"));
    return c;
}

}  // namespace cpi
