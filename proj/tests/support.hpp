#pragma once

// Independent reference implementations used only by the tests.

#include "cpi/cpi.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace cpi_test {

/// O(m^2) DFT, two-sided amplitudes |X_k|/m indexed by bin k in [0, m).
inline std::vector<double> naive_dft_amplitudes(const std::vector<double>& x) {
    const std::size_t m = x.size();
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::complex<double> acc{};
        for (std::size_t j = 0; j < m; ++j)
            acc += x[j] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * j % m) / static_cast<double>(m));
        out[k] = std::abs(acc) / static_cast<double>(m);
    }
    return out;
}

/// Satisfiability by enumerating all 2^num_vars assignments.
inline bool truth_table_sat(const cpi::CnfFormula& f) {
    const auto n = static_cast<std::size_t>(f.num_vars);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        cpi::Assignment a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = (mask >> i) & 1u;
        bool all = true;
        for (const auto& c : f.clauses) {
            bool any = false;
            for (int l : c) any = any || (l > 0 ? a[static_cast<std::size_t>(l - 1)] : !a[static_cast<std::size_t>(-l - 1)]);
            if (!any) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

/// Clauses of width 1..3 over distinct variables.
inline cpi::CnfFormula random_3cnf(int vars, int clauses, std::mt19937_64& rng) {
    cpi::CnfFormula f;
    f.num_vars = vars;
    std::uniform_int_distribution<int> width(1, std::min(3, vars));
    std::uniform_int_distribution<int> var(1, vars);
    std::bernoulli_distribution neg(0.5);
    for (int j = 0; j < clauses; ++j) {
        std::vector<int> c;
        const int w = width(rng);
        while (static_cast<int>(c.size()) < w) {
            const int v = var(rng);
            bool dup = false;
            for (int l : c) dup = dup || std::abs(l) == v;
            if (!dup) c.push_back(neg(rng) ? -v : v);
        }
        f.clauses.push_back(c);
    }
    return f;
}

/// Mean of prod cos(a_i t) over one period 2 pi by the rectangle rule. With
/// more points than twice the largest frequency the rule is exact for this
/// trigonometric polynomial up to rounding.
inline double time_average(const std::vector<std::uint64_t>& a, std::size_t points) {
    double acc = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        const double t = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(points);
        double p = 1.0;
        for (auto v : a) p *= std::cos(static_cast<double>(v) * t);
        acc += p;
    }
    return acc / static_cast<double>(points);
}

/// Number of sign vectors eps with sum eps_i a_i == target, by recursion.
inline std::uint64_t signed_sum_count(const std::vector<std::uint64_t>& a, std::int64_t target, std::size_t i = 0) {
    if (i == a.size()) return target == 0 ? 1 : 0;
    const auto v = static_cast<std::int64_t>(a[i]);
    return signed_sum_count(a, target - v, i + 1) + signed_sum_count(a, target + v, i + 1);
}

/// Mean over [t_0, t_last] of piecewise-linear data by the trapezoid rule.
inline double trapezoid_mean(const std::vector<double>& t, const std::vector<double>& y) {
    double area = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) area += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    return area / (t.back() - t.front());
}

inline std::vector<std::uint64_t> random_values(std::size_t n, std::uint64_t max, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> d(1, max);
    std::vector<std::uint64_t> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

/// Balanced instance [1, 2, 4, ..., 2^(n-2), 2^(n-1) - 1].
inline cpi::CpiInstance doubling_instance(std::size_t n) {
    std::vector<std::uint64_t> v;
    for (std::size_t i = 0; i + 1 < n; ++i) v.push_back(std::uint64_t{1} << i);
    v.push_back((std::uint64_t{1} << (n - 1)) - 1);
    return cpi::CpiInstance(v);
}

/// A grid signal with the given samples and dt, periodic over its length.
inline cpi::Signal make_signal(std::vector<double> samples, double dt) {
    cpi::Signal s;
    s.t0 = 0.0;
    s.dt = dt;
    s.samples = std::move(samples);
    s.align_period = dt * static_cast<double>(s.samples.size());
    return s;
}

}  // namespace cpi_test
