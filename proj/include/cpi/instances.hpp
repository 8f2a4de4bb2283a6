#pragma once

// Canonical CPI / PARTITION instances: validation, text format, scaling and
// the timing arithmetic (alignment period, Nyquist rate) used by the
// simulated signal chain.

#include "cpi/error.hpp"

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cpi {

/// Upper bound on the element sum. Leaves two bits of headroom so that
/// 2*sum (Nyquist rate) and the PARTITION padding arithmetic never overflow.
inline constexpr std::uint64_t kMaxInstanceSum = std::uint64_t{1} << 62;

enum class Answer { No, Yes };

inline const char* to_string(Answer a) { return a == Answer::Yes ? "YES" : "NO"; }

/// A sequence of positive integer angular frequencies a_1..a_n; the signal
/// they describe is prod_i cos(a_i t).
class CpiInstance {
public:
    explicit CpiInstance(std::vector<std::uint64_t> values) : values_(std::move(values)) {
        if (values_.empty()) throw InvalidInput("instance must contain at least one value");
        for (auto v : values_) {
            if (v == 0) throw InvalidInput("instance values must be nonzero");
            if (v > kMaxInstanceSum - sum_) throw InvalidInput("instance sum overflows");
            sum_ += v;
        }
        gcd_ = std::accumulate(values_.begin(), values_.end(), std::uint64_t{0},
                               [](std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); });
    }

    std::span<const std::uint64_t> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    std::uint64_t operator[](std::size_t i) const { return values_[i]; }
    std::uint64_t sum() const { return sum_; }
    std::uint64_t gcd() const { return gcd_; }
    std::uint64_t min() const { return *std::min_element(values_.begin(), values_.end()); }
    std::uint64_t max() const { return *std::max_element(values_.begin(), values_.end()); }

    friend bool operator==(const CpiInstance& a, const CpiInstance& b) { return a.values_ == b.values_; }
    friend auto operator<=>(const CpiInstance& a, const CpiInstance& b) { return a.values_ <=> b.values_; }

private:
    std::vector<std::uint64_t> values_;
    std::uint64_t sum_ = 0;
    std::uint64_t gcd_ = 0;
};

/// Parses whitespace- or comma-separated integers. Signs are accepted and
/// dropped: cos is even, so -a and a describe the same signal.
inline CpiInstance parse_instance(std::string_view text) {
    std::vector<std::uint64_t> values;
    std::size_t pos = 0;
    auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\n' || c == '\r'; };
    while (pos < text.size()) {
        while (pos < text.size() && is_sep(text[pos])) ++pos;
        if (pos >= text.size()) break;
        std::size_t end = pos;
        while (end < text.size() && !is_sep(text[end])) ++end;
        std::string_view tok = text.substr(pos, end - pos);
        pos = end;

        std::string_view digits = tok;
        if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (digits.empty() || ec == std::errc::invalid_argument || ptr != digits.data() + digits.size())
            throw InvalidInput("not an integer: '" + std::string(tok) + "'");
        if (ec == std::errc::result_out_of_range || v > kMaxInstanceSum)
            throw InvalidInput("value out of range: '" + std::string(tok) + "'");
        if (v == 0) throw InvalidInput("zero entry is not a valid frequency");
        values.push_back(v);
    }
    if (values.empty()) throw InvalidInput("empty instance");
    return CpiInstance(std::move(values));
}

/// Canonical serialization: space-separated values.
inline std::string to_string(const CpiInstance& inst) {
    std::string out;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(inst[i]);
    }
    return out;
}

/// Instance file: one instance per line, '#' starts a comment line, blank
/// lines skipped.
inline std::vector<CpiInstance> parse_instance_file(std::string_view text) {
    std::vector<CpiInstance> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            out.push_back(parse_instance(line));
        } catch (const InvalidInput& e) {
            throw InvalidInput("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::string to_instance_file(std::span<const CpiInstance> insts) {
    std::string out;
    for (const auto& i : insts) out += to_string(i) + '\n';
    return out;
}

/// Exact non-negative rational num/den.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// First instant after 0 at which every cos(a_i t) is back in phase, in units
/// of 2*pi: lcm(1/a_1, ..., 1/a_n) = 1/gcd(a_1, ..., a_n).
inline Rational alignment_time(const CpiInstance& inst) { return {1, inst.gcd()}; }

/// Twice the highest spectral line, sum(a_i).
inline std::uint64_t nyquist_frequency(const CpiInstance& inst) { return 2 * inst.sum(); }

/// An instance with every frequency multiplied by lambda.
struct ScaledInstance {
    CpiInstance base;
    double lambda = 1.0;
    std::vector<double> scaled_values;
    /// Lower bound on the distance between distinct spectral lines.
    double min_spectral_gap = 1.0;

    double scaled_sum() const {
        return std::accumulate(scaled_values.begin(), scaled_values.end(), 0.0);
    }
};

inline ScaledInstance scale_by(const CpiInstance& inst, double lambda) {
    if (!(lambda > 0)) throw InvalidInput("scale factor must be positive");
    ScaledInstance out{inst, lambda, {}, lambda};
    out.scaled_values.reserve(inst.size());
    for (auto v : inst.values()) out.scaled_values.push_back(lambda * static_cast<double>(v));
    return out;
}

/// Squeezes the instance so that its highest line sits at margin * f_star.
/// Line positions are integer combinations of the a_i, so after scaling they
/// stay at least lambda apart.
inline ScaledInstance scale_instance(const CpiInstance& inst, double f_star, double margin) {
    if (!(f_star > 0)) throw InvalidInput("f_star must be positive");
    if (!(margin > 0 && margin < 1)) throw InvalidInput("margin must lie in (0,1)");
    return scale_by(inst, margin * f_star / static_cast<double>(inst.sum()));
}

}  // namespace cpi
