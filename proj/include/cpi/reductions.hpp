#pragma once

// CNF handling, the 3-SAT -> SUBSET-SUM -> PARTITION reduction and witness
// extraction by self-reduction against any PARTITION decision oracle.

#include "cpi/analog_pipeline.hpp"
#include "cpi/calibration.hpp"
#include "cpi/dsp.hpp"
#include "cpi/error.hpp"
#include "cpi/exact_oracle.hpp"
#include "cpi/instances.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cpi {

/// Clauses of nonzero signed variable indices in [1, num_vars]. An empty
/// clause is kept as the unsatisfiability marker.
struct CnfFormula {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;

    bool has_empty_clause() const {
        return std::any_of(clauses.begin(), clauses.end(), [](const auto& c) { return c.empty(); });
    }
    bool occurs(int var) const {
        for (const auto& c : clauses)
            for (int l : c)
                if (std::abs(l) == var) return true;
        return false;
    }
    friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

/// One truth value per variable; index 0 is variable 1.
using Assignment = std::vector<bool>;

inline bool evaluate(const CnfFormula& f, const Assignment& a) {
    for (const auto& c : f.clauses) {
        bool sat = false;
        for (int l : c) {
            const bool v = a.at(static_cast<std::size_t>(std::abs(l) - 1));
            if ((l > 0) == v) {
                sat = true;
                break;
            }
        }
        if (!sat) return false;
    }
    return true;
}

struct DimacsOptions {
    /// Header/body count mismatches become errors instead of warnings.
    bool strict = false;
};

inline CnfFormula parse_dimacs(std::string_view text, DimacsOptions opts = {},
                               std::vector<std::string>* warnings = nullptr) {
    auto warn = [&](const std::string& msg) {
        if (opts.strict) throw InvalidInput(msg);
        if (warnings) warnings->push_back(msg);
    };
    std::istringstream in{std::string(text)};
    std::string line;
    CnfFormula f;
    bool have_header = false;
    long declared_clauses = 0;
    std::vector<int> current;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const char lead = line[first];
        if (lead == 'c') continue;
        if (lead == '%') break;
        std::istringstream ls(line);
        if (lead == 'p') {
            std::string p, fmt;
            long v = -1, c = -1;
            if (have_header || !(ls >> p >> fmt >> v >> c) || fmt != "cnf" || v < 0 || c < 0)
                throw InvalidInput("line " + std::to_string(lineno) + ": malformed DIMACS header");
            f.num_vars = static_cast<int>(v);
            declared_clauses = c;
            have_header = true;
            continue;
        }
        if (!have_header) throw InvalidInput("line " + std::to_string(lineno) + ": clause before 'p cnf' header");
        std::string tok;
        while (ls >> tok) {
            char* end = nullptr;
            const long lit = std::strtol(tok.c_str(), &end, 10);
            if (*end != '\0') throw InvalidInput("line " + std::to_string(lineno) + ": bad literal '" + tok + "'");
            if (lit == 0) {
                f.clauses.push_back(current);
                current.clear();
                continue;
            }
            if (std::labs(lit) > f.num_vars)
                throw InvalidInput("line " + std::to_string(lineno) + ": literal " + tok + " out of range");
            current.push_back(static_cast<int>(lit));
        }
    }
    if (!have_header) throw InvalidInput("missing 'p cnf' header");
    if (!current.empty()) {
        warn("last clause is not terminated by 0");
        f.clauses.push_back(current);
    }
    if (static_cast<long>(f.clauses.size()) != declared_clauses)
        warn("header declares " + std::to_string(declared_clauses) + " clauses, found " +
             std::to_string(f.clauses.size()));
    return f;
}

inline std::string to_dimacs(const CnfFormula& f) {
    std::ostringstream out;
    out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    for (const auto& c : f.clauses) {
        for (int l : c) out << l << ' ';
        out << "0\n";
    }
    return out.str();
}

/// Substitutes var := val. Satisfied clauses disappear, the falsified
/// literal is deleted from the others; variable numbering is unchanged.
inline CnfFormula simplify(const CnfFormula& f, int var, bool val) {
    if (var < 1 || var > f.num_vars) throw InvalidInput("simplify: variable out of range");
    CnfFormula out{f.num_vars, {}};
    for (const auto& c : f.clauses) {
        bool satisfied = false;
        std::vector<int> kept;
        for (int l : c) {
            if (std::abs(l) != var) {
                kept.push_back(l);
            } else if ((l > 0) == val) {
                satisfied = true;
                break;
            }
        }
        if (!satisfied) out.clauses.push_back(std::move(kept));
    }
    return out;
}

struct ThreeCnf {
    CnfFormula formula;
    /// Variables 1..original_vars are the input's; higher ones are fresh.
    int original_vars = 0;
};

/// Splits clauses wider than three with fresh chain variables:
/// (l1 l2 y1)(-y1 l3 y2)...(-yk l_{w-1} l_w). Satisfiability is preserved and
/// every model projects onto a model of the input.
inline ThreeCnf to_3cnf(const CnfFormula& f) {
    ThreeCnf out{{f.num_vars, {}}, f.num_vars};
    int next = f.num_vars;
    for (const auto& c : f.clauses) {
        if (c.size() <= 3) {
            out.formula.clauses.push_back(c);
            continue;
        }
        int y = ++next;
        out.formula.clauses.push_back({c[0], c[1], y});
        for (std::size_t i = 2; i + 2 < c.size(); ++i) {
            const int y_next = ++next;
            out.formula.clauses.push_back({-y, c[i], y_next});
            y = y_next;
        }
        out.formula.clauses.push_back({-y, c[c.size() - 2], c[c.size() - 1]});
    }
    out.formula.num_vars = next;
    return out;
}

/// The reduced numbers exceed the instance magnitude limit.
class MagnitudeOverflow : public Error {
public:
    MagnitudeOverflow(const std::string& what, unsigned required_bits)
        : Error(what), required_bits_(required_bits) {}
    unsigned required_bits() const { return required_bits_; }

private:
    unsigned required_bits_;
};

enum class EntryKind { PositiveLiteral, NegativeLiteral, Slack, PadWithTarget, PadOther };

/// What instance position i stands for.
struct ReductionEntry {
    EntryKind kind;
    int var = 0;     ///< for literal entries (3-CNF numbering)
    int clause = -1; ///< for slack entries
};

struct PartitionReduction {
    CpiInstance instance;
    std::vector<ReductionEntry> entries;
    std::uint64_t base = 6;
    std::size_t digits = 0;
    std::uint64_t subset_target = 0;
    int original_vars = 0;
    /// Set when the formula has no clauses; the instance is then the fixed
    /// YES-instance [1, 1].
    bool trivial = false;
};

inline constexpr std::uint64_t kReductionBase = 6;

/// Digit construction: one digit per occurring variable and per clause,
/// base 6. A literal number has a 1 in its variable digit and a 1 in each
/// clause digit it occurs in; every clause gets two slack numbers with a 1
/// in its digit. Target: 1 per variable digit, 3 per clause digit. Column
/// sums stay <= 5, so there are no carries. Finally the pair (2S - T, S + T)
/// turns SUBSET-SUM target T over total S into PARTITION.
inline PartitionReduction sat_to_partition(const CnfFormula& input) {
    const ThreeCnf three = to_3cnf(input);
    const CnfFormula& f = three.formula;
    if (f.clauses.empty())
        return PartitionReduction{CpiInstance({1, 1}), {{EntryKind::PadWithTarget}, {EntryKind::PadOther}},
                                  kReductionBase, 0, 0, three.original_vars, true};

    std::vector<int> vars;
    {
        std::set<int> seen;
        for (const auto& c : f.clauses)
            for (int l : c) seen.insert(std::abs(l));
        vars.assign(seen.begin(), seen.end());
    }
    const std::size_t nc = f.clauses.size();
    const std::size_t digits = vars.size() + nc;
    using wide = unsigned __int128;
    const wide limit = kMaxInstanceSum;

    std::vector<wide> place(digits + 1, 1);
    for (std::size_t d = 1; d <= digits; ++d) {
        place[d] = place[d - 1] * kReductionBase;
        if (place[d] > (wide{1} << 100)) throw MagnitudeOverflow("reduction needs more than 100 bits", 101);
    }
    // Clause digits occupy positions [0, nc), variable digits the rest.
    std::vector<wide> numbers;
    std::vector<ReductionEntry> entries;
    for (std::size_t vi = 0; vi < vars.size(); ++vi) {
        for (int polarity : {+1, -1}) {
            wide num = place[nc + vi];
            const int lit = polarity * vars[vi];
            for (std::size_t j = 0; j < nc; ++j)
                for (int l : f.clauses[j])
                    if (l == lit) num += place[j];
            numbers.push_back(num);
            entries.push_back({polarity > 0 ? EntryKind::PositiveLiteral : EntryKind::NegativeLiteral, vars[vi], -1});
        }
    }
    for (std::size_t j = 0; j < nc; ++j)
        for (int s = 0; s < 2; ++s) {
            numbers.push_back(place[j]);
            entries.push_back({EntryKind::Slack, 0, static_cast<int>(j)});
        }
    wide target = 0;
    for (std::size_t vi = 0; vi < vars.size(); ++vi) target += place[nc + vi];
    for (std::size_t j = 0; j < nc; ++j) target += 3 * place[j];
    wide total = 0;
    for (auto v : numbers) total += v;

    const wide grand = 4 * total;
    if (grand > limit) {
        unsigned bits = 0;
        for (wide g = grand; g; g >>= 1) ++bits;
        throw MagnitudeOverflow("reduced PARTITION instance needs " + std::to_string(bits) +
                                    "-bit sums; the limit is 62 bits",
                                bits);
    }
    numbers.push_back(2 * total - target);
    entries.push_back({EntryKind::PadWithTarget});
    numbers.push_back(total + target);
    entries.push_back({EntryKind::PadOther});

    std::vector<std::uint64_t> values(numbers.begin(), numbers.end());
    return PartitionReduction{CpiInstance(std::move(values)), std::move(entries), kReductionBase, digits,
                              static_cast<std::uint64_t>(target), three.original_vars, false};
}

/// Reads an assignment off a balanced split of a reduced instance: the side
/// holding the 2S - T pad sums to T with the remaining numbers, and its
/// literal entries are the true literals.
inline Assignment assignment_from_partition(const PartitionReduction& red, const PartitionWitness& w) {
    std::vector<bool> in_subset(red.entries.size(), false);
    for (auto i : w.subset) in_subset.at(i) = true;
    std::size_t pad = 0;
    while (red.entries[pad].kind != EntryKind::PadWithTarget) ++pad;
    const bool side = in_subset[pad];
    Assignment a(static_cast<std::size_t>(red.original_vars), false);
    for (std::size_t i = 0; i < red.entries.size(); ++i) {
        const auto& e = red.entries[i];
        if (in_subset[i] != side) continue;
        if (e.kind == EntryKind::PositiveLiteral && e.var <= red.original_vars)
            a[static_cast<std::size_t>(e.var - 1)] = true;
    }
    return a;
}

enum class BackendKind { ExactDp, ExactBruteForce, AnalogSimulated };

inline const char* to_string(BackendKind k) {
    switch (k) {
        case BackendKind::ExactDp: return "exact-dp";
        case BackendKind::ExactBruteForce: return "exact-bf";
        case BackendKind::AnalogSimulated: return "analog";
    }
    return "?";
}

/// Anything that answers PARTITION for a CpiInstance.
struct OracleBackend {
    BackendKind kind = BackendKind::ExactDp;
    std::function<bool(const CpiInstance&)> decide;
};

/// Dense DP within `budget`, meet-in-the-middle beyond it (reduced SAT
/// instances have astronomically large sums but few elements).
inline OracleBackend exact_dp_backend(std::uint64_t budget = kDefaultDpBudget) {
    return {BackendKind::ExactDp, [budget](const CpiInstance& i) { return decide_exact(i, budget); }};
}

inline OracleBackend exact_bruteforce_backend() {
    return {BackendKind::ExactBruteForce, [](const CpiInstance& i) { return decide_bruteforce(i); }};
}

struct AnalogBackendOptions {
    NonidealityConfig cfg = NonidealityConfig::ideal();
    FilterSpec spec{};
    SamplingPlan plan{};
    /// Falls back to nominal_threshold when absent.
    std::optional<DecisionThreshold> threshold;
    /// Target fraction of the bandwidth used after squeezing.
    double squeeze_margin = 0.5;
};

/// Runs the simulated chain. Instances beyond the multiplier bandwidth are
/// squeezed first: f_base, f0 scale by lambda and tau by 1/lambda, which
/// leaves every line ratio and hence the answer unchanged. Instances whose
/// grid would exceed kMaxGridPoints are refused with SimulationError.
inline OracleBackend analog_backend(AnalogBackendOptions opts) {
    return {BackendKind::AnalogSimulated, [opts](const CpiInstance& inst) {
                NonidealityConfig cfg = opts.cfg;
                FilterSpec spec = opts.spec;
                SamplingPlan plan = opts.plan;
                const double span = static_cast<double>(inst.sum()) * cfg.f_base;
                if (span > cfg.bandwidth_f_star) {
                    const double lambda =
                        scale_instance(inst, cfg.bandwidth_f_star / cfg.f_base, opts.squeeze_margin).lambda;
                    cfg.f_base *= lambda;
                    spec.cutoff_f0 *= lambda;
                    plan.tau /= lambda;
                }
                const auto thr = opts.threshold ? *opts.threshold : nominal_threshold(inst.size(), cfg, spec);
                return decide_analog(inst, cfg, spec, thr, plan, /*strict=*/true).answer == Answer::Yes;
            }};
}

/// The backend failed mid-extraction; `prefix` holds the values fixed so far.
class OracleFailure : public Error {
public:
    OracleFailure(const std::string& what, Assignment prefix) : Error(what), prefix_(std::move(prefix)) {}
    const Assignment& prefix() const { return prefix_; }

private:
    Assignment prefix_;
};

struct WitnessResult {
    bool satisfiable = false;
    Assignment assignment;
    std::size_t oracle_calls = 0;
};

/// Decision-to-search: one oracle call on the whole formula, then for each
/// variable try x := 1 and keep it iff the restricted formula is still
/// satisfiable. Restrictions that are trivially decided (no clauses left, or
/// an empty clause) skip the oracle. At most 1 + num_vars calls.
inline WitnessResult extract_witness(const CnfFormula& f, const OracleBackend& oracle) {
    WitnessResult res;
    res.assignment.assign(static_cast<std::size_t>(f.num_vars), false);
    std::size_t fixed = 0;
    auto ask = [&](const CnfFormula& g) {
        ++res.oracle_calls;
        try {
            return oracle.decide(sat_to_partition(g).instance);
        } catch (const Error& e) {
            throw OracleFailure(std::string("oracle failed: ") + e.what(),
                                Assignment(res.assignment.begin(),
                                           res.assignment.begin() + static_cast<std::ptrdiff_t>(fixed)));
        }
    };
    auto satisfiable = [&](const CnfFormula& g) {
        if (g.has_empty_clause()) return false;
        if (g.clauses.empty()) return true;
        return ask(g);
    };

    if (!ask(f)) return res;
    CnfFormula g = f;
    for (int v = 1; v <= f.num_vars; ++v, ++fixed) {
        if (!g.occurs(v)) continue;
        CnfFormula with_true = simplify(g, v, true);
        if (satisfiable(with_true)) {
            res.assignment[static_cast<std::size_t>(v - 1)] = true;
            g = std::move(with_true);
        } else {
            g = simplify(g, v, false);
        }
    }
    if (!evaluate(f, res.assignment))
        throw OracleFailure("oracle answers are inconsistent: extracted assignment does not satisfy the formula",
                            res.assignment);
    res.satisfiable = true;
    return res;
}

/// DIMACS solution lines.
inline std::string format_solution(const WitnessResult& r) {
    if (!r.satisfiable) return "s UNSATISFIABLE\n";
    std::string out = "s SATISFIABLE\nv";
    for (std::size_t i = 0; i < r.assignment.size(); ++i)
        out += ' ' + std::string(r.assignment[i] ? "" : "-") + std::to_string(i + 1);
    out += " 0\n";
    return out;
}

}  // namespace cpi
