#pragma once

// Ground-truth digital solvers for PARTITION and the analytic line spectrum of
// prod_i cos(a_i t). Everything the simulated analogue path produces is
// checked against these.

#include "cpi/error.hpp"
#include "cpi/instances.hpp"
#include "cpi/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpi {

inline constexpr std::size_t kBruteForceMaxN = 30;
inline constexpr std::size_t kAnalyticSpectrumMaxN = 20;
inline constexpr std::size_t kMeetInMiddleMaxN = 44;
inline constexpr std::uint64_t kDefaultDpBudget = 100'000'000;

/// Indices (0-based) of one side M0 of a balanced split.
struct PartitionWitness {
    std::vector<std::size_t> subset;

    bool balances(const CpiInstance& inst) const {
        std::uint64_t in = 0;
        for (auto i : subset) in += inst[i];
        return 2 * in == inst.sum();
    }
};

namespace detail {

inline void require_bruteforce_size(const CpiInstance& inst) {
    if (inst.size() > kBruteForceMaxN)
        throw BudgetExceeded("exhaustive enumeration limited to n <= " + std::to_string(kBruteForceMaxN));
}

/// Number of sign vectors eps in {+-1}^n with sum eps_i a_i = 0, walking the
/// 2^(n-1) vectors with eps_1 = +1 in Gray-code order and doubling.
inline std::uint64_t balanced_sign_count(const CpiInstance& inst) {
    require_bruteforce_size(inst);
    const std::size_t n = inst.size();
    std::int64_t s = 0;
    for (auto v : inst.values()) s += static_cast<std::int64_t>(v);
    std::vector<signed char> sign(n, 1);
    std::uint64_t hits = (s == 0) ? 1 : 0;
    const std::uint64_t steps = std::uint64_t{1} << (n - 1);
    for (std::uint64_t k = 1; k < steps; ++k) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(k)) + 1;  // never flips index 0
        const auto a = static_cast<std::int64_t>(inst[bit]);
        s += sign[bit] > 0 ? -2 * a : 2 * a;
        sign[bit] = static_cast<signed char>(-sign[bit]);
        if (s == 0) ++hits;
    }
    return 2 * hits;
}

struct SubsetSum {
    std::uint64_t sum;
    std::uint64_t mask;
};

/// All subset sums of values[first, last) in ascending order, built by
/// merging the list with its shifted copy once per element.
inline std::vector<SubsetSum> sorted_subset_sums(std::span<const std::uint64_t> values, std::size_t first,
                                                  std::size_t last) {
    std::vector<SubsetSum> cur{{0, 0}}, shifted, merged;
    for (std::size_t i = first; i < last; ++i) {
        shifted.resize(cur.size());
        for (std::size_t k = 0; k < cur.size(); ++k)
            shifted[k] = {cur[k].sum + values[i], cur[k].mask | (std::uint64_t{1} << i)};
        merged.resize(2 * cur.size());
        std::merge(cur.begin(), cur.end(), shifted.begin(), shifted.end(), merged.begin(),
                   [](const SubsetSum& a, const SubsetSum& b) { return a.sum < b.sum; });
        cur.swap(merged);
    }
    return cur;
}

}  // namespace detail

/// True iff some sign vector balances the instance. Enumerates 2^(n-1)
/// vectors, so n is capped at 30.
inline bool decide_bruteforce(const CpiInstance& inst) {
    detail::require_bruteforce_size(inst);
    if (inst.sum() % 2) return false;
    return detail::balanced_sign_count(inst) > 0;
}

/// Mean of prod_i cos(a_i t) over one period: the fraction of sign vectors
/// that balance. Zero exactly for NO-instances.
inline double ideal_dc(const CpiInstance& inst) {
    const auto count = detail::balanced_sign_count(inst);
    return std::ldexp(static_cast<double>(count), -static_cast<int>(inst.size()));
}

/// Pseudo-polynomial subset-sum reachability over [0, sum/2] with a packed
/// bitset. `budget` caps the table size in bits.
inline bool decide_dp(const CpiInstance& inst, std::uint64_t budget = kDefaultDpBudget) {
    if (inst.sum() % 2) return false;
    const std::uint64_t half = inst.sum() / 2;
    if (half + 1 > budget)
        throw BudgetExceeded("DP table of " + std::to_string(half + 1) + " cells exceeds budget " +
                             std::to_string(budget));
    const std::size_t words = static_cast<std::size_t>(half / 64 + 1);
    const unsigned top_bits = static_cast<unsigned>(half % 64) + 1;
    const std::uint64_t top_mask = top_bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << top_bits) - 1;
    std::vector<std::uint64_t> reach(words, 0);
    reach[0] = 1;
    for (auto a : inst.values()) {
        if (a > half) continue;
        const std::size_t q = static_cast<std::size_t>(a / 64);
        const unsigned r = static_cast<unsigned>(a % 64);
        for (std::size_t w = words; w-- > q;) {
            std::uint64_t v = reach[w - q] << r;
            if (r && w > q) v |= reach[w - q - 1] >> (64 - r);
            reach[w] |= v;
        }
        reach[words - 1] &= top_mask;
        if ((reach[words - 1] >> (top_bits - 1)) & 1) return true;
    }
    return (reach[words - 1] >> (top_bits - 1)) & 1;
}

/// A balanced split via DP with backtracking, or nullopt for NO-instances.
/// Each sum records the item that first reached it; following those links
/// from sum/2 visits strictly decreasing item indices.
inline std::optional<PartitionWitness> find_partition(const CpiInstance& inst,
                                                      std::uint64_t budget = kDefaultDpBudget) {
    if (inst.sum() % 2) return std::nullopt;
    const std::uint64_t half = inst.sum() / 2;
    if (half + 1 > budget)
        throw BudgetExceeded("DP table of " + std::to_string(half + 1) + " cells exceeds budget " +
                             std::to_string(budget));
    constexpr std::uint32_t kUnreached = 0xffffffffu;
    std::vector<std::uint32_t> from(static_cast<std::size_t>(half + 1), kUnreached);
    from[0] = static_cast<std::uint32_t>(inst.size());  // sentinel, never dereferenced
    for (std::size_t i = 0; i < inst.size() && from[half] == kUnreached; ++i) {
        const auto a = inst[i];
        if (a > half) continue;
        for (std::uint64_t s = half; s >= a; --s) {
            if (from[s] == kUnreached && from[s - a] != kUnreached && from[s - a] != i)
                from[s] = static_cast<std::uint32_t>(i);
            if (s == a) break;
        }
    }
    if (from[half] == kUnreached) return std::nullopt;
    PartitionWitness w;
    for (std::uint64_t s = half; s > 0;) {
        const auto i = from[s];
        w.subset.push_back(i);
        s -= inst[i];
    }
    std::sort(w.subset.begin(), w.subset.end());
    return w;
}

/// Horowitz-Sahni meet-in-the-middle: sorted subset sums of each half and a
/// two-pointer sweep for sum/2. O(2^(n/2)) regardless of magnitude.
inline std::optional<PartitionWitness> find_partition_meet_in_middle(const CpiInstance& inst) {
    if (inst.size() > kMeetInMiddleMaxN)
        throw BudgetExceeded("meet-in-the-middle limited to n <= " + std::to_string(kMeetInMiddleMaxN));
    if (inst.sum() % 2) return std::nullopt;
    const std::uint64_t target = inst.sum() / 2;
    const std::size_t mid = inst.size() / 2;
    const auto left = detail::sorted_subset_sums(inst.values(), 0, mid);
    const auto right = detail::sorted_subset_sums(inst.values(), mid, inst.size());
    std::size_t i = 0;
    std::size_t j = right.size();
    while (i < left.size() && j > 0) {
        const std::uint64_t s = left[i].sum + right[j - 1].sum;
        if (s == target) {
            PartitionWitness w;
            const std::uint64_t mask = left[i].mask | right[j - 1].mask;
            for (std::size_t k = 0; k < inst.size(); ++k)
                if ((mask >> k) & 1) w.subset.push_back(k);
            return w;
        }
        if (s < target) ++i;
        else --j;
    }
    return std::nullopt;
}

inline bool decide_meet_in_middle(const CpiInstance& inst) {
    return find_partition_meet_in_middle(inst).has_value();
}

/// Dense DP when the table fits the budget, meet-in-the-middle otherwise.
inline bool decide_exact(const CpiInstance& inst, std::uint64_t budget = kDefaultDpBudget) {
    if (inst.sum() % 2) return false;
    if (inst.sum() / 2 + 1 <= budget) return decide_dp(inst, budget);
    return decide_meet_in_middle(inst);
}

inline std::optional<PartitionWitness> find_partition_exact(const CpiInstance& inst,
                                                            std::uint64_t budget = kDefaultDpBudget) {
    if (inst.sum() % 2) return std::nullopt;
    if (inst.sum() / 2 + 1 <= budget) return find_partition(inst, budget);
    return find_partition_meet_in_middle(inst);
}

/// Lines at every signed sum sum_i eps_i a_i, each weighted by the number of
/// sign vectors hitting it over 2^n. Built by convolving the per-element
/// {-a, +a} pairs, so the DC line is independent of ideal_dc's enumeration.
inline Spectrum analytic_spectrum(const CpiInstance& inst) {
    if (inst.size() > kAnalyticSpectrumMaxN)
        throw BudgetExceeded("analytic spectrum limited to n <= " + std::to_string(kAnalyticSpectrumMaxN));
    std::map<std::int64_t, std::uint64_t> counts{{0, 1}};
    for (auto v : inst.values()) {
        const auto a = static_cast<std::int64_t>(v);
        std::map<std::int64_t, std::uint64_t> next;
        for (const auto& [s, c] : counts) {
            next[s + a] += c;
            next[s - a] += c;
        }
        counts.swap(next);
    }
    Spectrum out;
    out.unit = FrequencyUnit::Instance;
    const int n = static_cast<int>(inst.size());
    for (const auto& [s, c] : counts) out.lines[static_cast<double>(s)] = std::ldexp(static_cast<double>(c), -n);
    return out;
}

}  // namespace cpi
