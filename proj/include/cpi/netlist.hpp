#pragma once

// SPICE netlist emission for the multiplier cascade and import of external
// transient traces.

#include "cpi/analog_pipeline.hpp"
#include "cpi/dsp.hpp"
#include "cpi/error.hpp"
#include "cpi/instances.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cpi {

/// Node names of one multiplier + amplifier stage.
struct StageNodes {
    std::string chain_in;    ///< running product entering the stage
    std::string source;      ///< cosine source multiplied in
    std::string z_pin;
    std::string multiplier;  ///< multiplier output
    std::string amplifier;   ///< stage output
};

struct NetlistDoc {
    std::string title;
    std::vector<std::string> cards;
    std::vector<StageNodes> node_map;
    std::string output_node;  ///< node probed by .four after the filter

    std::string text() const {
        std::string out = title + '\n';
        for (const auto& c : cards) out += c + '\n';
        return out;
    }
};

namespace detail {

inline std::string spice_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// "+v" or "-|v|" for appending a constant to an expression.
inline std::string signed_term(double v) { return (v < 0 ? "-" : "+") + spice_num(std::abs(v)); }

/// Parses a SPICE number with an optional scale suffix (f p n u m k meg g t).
inline std::optional<double> parse_spice_number(std::string_view tok) {
    std::string s(tok);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return std::nullopt;
    std::string_view rest(end);
    double scale = 1.0;
    if (rest.starts_with("meg")) {
        scale = 1e6;
        rest.remove_prefix(3);
    } else if (!rest.empty()) {
        switch (rest.front()) {
            case 'f': scale = 1e-15; break;
            case 'p': scale = 1e-12; break;
            case 'n': scale = 1e-9; break;
            case 'u': scale = 1e-6; break;
            case 'm': scale = 1e-3; break;
            case 'k': scale = 1e3; break;
            case 'g': scale = 1e9; break;
            case 't': scale = 1e12; break;
            default: return std::nullopt;
        }
        rest.remove_prefix(1);
    }
    // Trailing unit letters such as "s" or "v" are ignored by SPICE.
    for (char c : rest)
        if (!std::isalpha(static_cast<unsigned char>(c))) return std::nullopt;
    return v * scale;
}

inline std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace detail

inline constexpr double kMaxTranStep = 2e-6;
/// Resistor used for every RC section; C follows from f0.
inline constexpr double kFilterResistance = 1'000.0;

/// Behavioural netlist mirroring the three-source cascade schematic:
/// cosine sources, B-source multipliers V(x)*V(y)*scale + V(z), amplifier
/// stages, the output amplifier, the RC low-pass and .tran/.four cards.
inline NetlistDoc emit_netlist(const CpiInstance& inst, const NonidealityConfig& cfg, const FilterSpec& spec,
                               const SamplingPlan& plan = {}) {
    if (inst.size() < 2) throw InvalidInput("emit_netlist needs at least two sources");
    cfg.validate();
    spec.validate();
    using detail::spice_num;
    NetlistDoc doc;
    doc.title = "* cosine product cascade for instance (" + to_string(inst) + ")";
    auto& c = doc.cards;
    c.push_back("* behavioural model: substitute the AD633 and uA741 vendor subcircuits for the B/E elements");
    c.push_back("* amplifier resistor networks are not modelled; gains are ideal placeholders");
    c.push_back("* .option cshunt=2e-15 may help transient convergence in some simulators");
    const double span = static_cast<double>(inst.sum()) * cfg.f_base;
    if (span > cfg.bandwidth_f_star)
        c.push_back("* WARNING: sum of source frequencies " + spice_num(span) + " Hz exceeds multiplier bandwidth " +
                    spice_num(cfg.bandwidth_f_star) + " Hz");

    for (std::size_t i = 0; i < inst.size(); ++i) {
        const double f = cfg.f_base * static_cast<double>(inst[i]);
        // SIN with a 90 degree phase is a cosine.
        c.push_back("V" + std::to_string(i + 1) + " src" + std::to_string(i + 1) + " 0 SIN(0 " +
                    spice_num(per_stage(cfg.source_amplitude, i, 1.0)) + " " + spice_num(f) + " 0 0 90)");
    }

    std::string chain = "src1";
    for (std::size_t k = 0; k + 1 < inst.size(); ++k) {
        const std::string id = std::to_string(k + 1);
        StageNodes nodes{chain, "src" + std::to_string(k + 2), "z" + id, "m" + id, "s" + id};
        const double in_off = per_stage(cfg.mult_input_offset, k, 0.0);
        const double out_off = per_stage(cfg.mult_output_offset, k, 0.0);
        const auto in = [&](const std::string& node) {
            return in_off == 0.0 ? "V(" + node + ")" : "(V(" + node + ")" + detail::signed_term(in_off) + ")";
        };
        c.push_back("* stage " + id);
        c.push_back("VZ" + id + " " + nodes.z_pin + " 0 DC " + spice_num(per_stage(cfg.z_compensation, k, 0.0)));
        std::string expr = in(nodes.chain_in) + "*" + in(nodes.source) + "*" + spice_num(cfg.mult_scale) + "+V(" +
                           nodes.z_pin + ")";
        if (out_off != 0.0) expr += detail::signed_term(out_off);
        c.push_back("BM" + id + " " + nodes.multiplier + " 0 V=" + expr);
        const double amp_off = per_stage(cfg.amp_offset, k, 0.0);
        std::string amp = spice_num(per_stage(cfg.amp_gain, k, 10.0)) + "*V(" + nodes.multiplier + ")";
        if (amp_off != 0.0) amp += detail::signed_term(amp_off);
        c.push_back("BA" + id + " " + nodes.amplifier + " 0 V=" + amp);
        chain = nodes.amplifier;
        doc.node_map.push_back(std::move(nodes));
    }
    c.push_back("* output amplifier");
    c.push_back("BOUT out 0 V=" + spice_num(cfg.output_gain) + "*V(" + chain + ")");

    std::string probe = "out";
    if (spec.kind != FilterKind::None) {
        if (spec.kind == FilterKind::Brickwall)
            c.push_back("* brickwall low-pass is not realisable; approximated by one RC section at f0");
        const unsigned sections = spec.kind == FilterKind::Brickwall ? 1 : spec.order;
        const double gain = spec.kind == FilterKind::Brickwall ? spec.dc_gain() : spec.per_stage_gain;
        const double cap = 1.0 / (2.0 * M_PI * kFilterResistance * spec.cutoff_f0);
        c.push_back("* low-pass: " + std::to_string(sections) + " RC section(s), f0 = " + spice_num(spec.cutoff_f0) +
                    " Hz, gain " + spice_num(gain) + " each");
        for (unsigned s = 1; s <= sections; ++s) {
            const std::string id = std::to_string(s);
            const std::string rc = "f" + id + "rc";
            c.push_back("RF" + id + " " + probe + " " + rc + " " + spice_num(kFilterResistance));
            c.push_back("CF" + id + " " + rc + " 0 " + spice_num(cap));
            c.push_back("EF" + id + " f" + id + " 0 " + rc + " 0 " + spice_num(gain));
            probe = "f" + id;
        }
    }
    doc.output_node = probe;

    const double period = 1.0 / (static_cast<double>(inst.gcd()) * cfg.f_base);
    const double f_nyquist = static_cast<double>(nyquist_frequency(inst)) * cfg.f_base;
    const double step = std::min(kMaxTranStep, 1.0 / (2.0 * f_nyquist * cfg.oversample));
    const double start = plan.burn_in_periods * period;
    const double stop = start + plan.record_periods * period;
    c.push_back(".tran " + spice_num(step) + " " + spice_num(stop) + " " + spice_num(start) + " " + spice_num(step));
    const double fundamental = 1.0 / period;
    for (const auto& n : doc.node_map) c.push_back(".four " + spice_num(fundamental) + " V(" + n.multiplier + ")");
    c.push_back(".four " + spice_num(fundamental) + " V(" + probe + ")");
    c.push_back(".end");
    return doc;
}

struct TranCard {
    double step = 0, stop = 0, start = 0, max_step = 0;
};

inline std::optional<TranCard> parse_tran(std::string_view netlist) {
    std::istringstream in{std::string(netlist)};
    std::string line;
    while (std::getline(in, line)) {
        auto f = detail::split_ws(line);
        if (f.empty()) continue;
        std::string head = f[0];
        for (auto& ch : head) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (head != ".tran" || f.size() < 3) continue;
        TranCard t;
        auto num = [&](std::size_t i) { return i < f.size() ? detail::parse_spice_number(f[i]) : std::optional<double>(0.0); };
        auto step = num(1), stop = num(2), start = num(3), max_step = num(4);
        if (!step || !stop || !start || !max_step) return std::nullopt;
        t.step = *step;
        t.stop = *stop;
        t.start = *start;
        t.max_step = *max_step;
        return t;
    }
    return std::nullopt;
}

/// Element-card syntax check for the subset of SPICE this module emits.
/// Returns one message per problem; empty means the netlist is well formed.
inline std::vector<std::string> validate_netlist(std::string_view netlist) {
    std::vector<std::string> problems;
    std::istringstream in{std::string(netlist)};
    std::string line;
    std::size_t lineno = 0;
    bool saw_end = false, saw_tran = false;
    auto bad = [&](const std::string& msg) { problems.push_back("line " + std::to_string(lineno) + ": " + msg); };
    auto node_ok = [](const std::string& n) {
        return !n.empty() && std::all_of(n.begin(), n.end(), [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
        });
    };
    auto number_ok = [](const std::string& s) { return detail::parse_spice_number(s).has_value(); };
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) continue;  // title
        auto f = detail::split_ws(line);
        if (f.empty() || f[0][0] == '*') continue;
        if (saw_end) {
            bad("card after .end");
            continue;
        }
        const char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(f[0][0])));
        if (kind == '.') {
            std::string d = f[0];
            for (auto& ch : d) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            if (d == ".end") saw_end = true;
            else if (d == ".tran") {
                saw_tran = true;
                if (f.size() < 3 || !std::all_of(f.begin() + 1, f.end(), number_ok)) bad("malformed .tran");
            } else if (d == ".four") {
                if (f.size() < 3 || !number_ok(f[1])) bad("malformed .four");
            } else if (d != ".option" && d != ".options") {
                bad("unknown directive " + f[0]);
            }
            continue;
        }
        switch (kind) {
            case 'R':
            case 'C':
                if (f.size() != 4 || !node_ok(f[1]) || !node_ok(f[2]) || !number_ok(f[3])) bad("malformed " + f[0]);
                break;
            case 'E':
                if (f.size() != 6 || !node_ok(f[1]) || !node_ok(f[2]) || !node_ok(f[3]) || !node_ok(f[4]) ||
                    !number_ok(f[5]))
                    bad("malformed " + f[0]);
                break;
            case 'B':
                if (f.size() < 4 || !node_ok(f[1]) || !node_ok(f[2]) || f[3].rfind("V=", 0) != 0)
                    bad("malformed " + f[0]);
                break;
            case 'V': {
                if (f.size() < 4 || !node_ok(f[1]) || !node_ok(f[2])) {
                    bad("malformed " + f[0]);
                    break;
                }
                const std::string& v = f[3];
                if (v == "DC") {
                    if (f.size() != 5 || !number_ok(f[4])) bad("malformed DC source " + f[0]);
                } else if (v.rfind("SIN(", 0) == 0) {
                    if (line.find(')') == std::string::npos) bad("unterminated SIN in " + f[0]);
                } else if (!number_ok(v)) {
                    bad("malformed source value in " + f[0]);
                }
                break;
            }
            default:
                bad("unsupported element " + f[0]);
        }
    }
    if (!saw_tran) problems.push_back("missing .tran directive");
    if (!saw_end) problems.push_back("missing .end");
    return problems;
}

/// Reads two-column (time, volts) text: comma, semicolon or whitespace
/// separated, '#' comments and a leading header line allowed. Variable-step
/// data is linearly interpolated onto a uniform grid with the same span and
/// row count.
inline SampledTrace parse_trace_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<double> t, v;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (auto& ch : line)
            if (ch == ',' || ch == ';') ch = ' ';
        auto f = detail::split_ws(line);
        if (f.empty() || f[0][0] == '#') continue;
        char* e1 = nullptr;
        char* e2 = nullptr;
        const double a = f.size() >= 2 ? std::strtod(f[0].c_str(), &e1) : 0.0;
        const double b = f.size() >= 2 ? std::strtod(f[1].c_str(), &e2) : 0.0;
        const bool numeric = f.size() >= 2 && *e1 == '\0' && *e2 == '\0' && e1 != f[0].c_str() && e2 != f[1].c_str();
        if (!numeric) {
            if (t.empty()) continue;  // header
            throw InvalidInput("line " + std::to_string(lineno) + ": expected two numeric columns");
        }
        if (!t.empty() && !(a > t.back()))
            throw InvalidInput("line " + std::to_string(lineno) + ": time is not strictly increasing");
        t.push_back(a);
        v.push_back(b);
    }
    if (t.size() < 2) throw InvalidInput("trace needs at least two rows");

    const std::size_t m = t.size();
    const double tau = (t.back() - t.front()) / static_cast<double>(m - 1);
    bool uniform = true;
    for (std::size_t i = 1; i < m && uniform; ++i) uniform = std::abs((t[i] - t[i - 1]) - tau) <= 1e-6 * tau;

    SampledTrace tr;
    tr.t_start = t.front();
    tr.tau = tau;
    if (uniform) {
        tr.values = std::move(v);
        return tr;
    }
    tr.resampled = true;
    tr.values.resize(m);
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double ti = (i + 1 == m) ? t.back() : t.front() + static_cast<double>(i) * tau;
        while (j + 2 < m && t[j + 1] < ti) ++j;
        const double w = (ti - t[j]) / (t[j + 1] - t[j]);
        tr.values[i] = v[j] + std::clamp(w, 0.0, 1.0) * (v[j + 1] - v[j]);
    }
    return tr;
}

}  // namespace cpi
