#pragma once

#include "cpi/exact_oracle.hpp"
#include "cpi/instances.hpp"
#include "cpi/rng.hpp"

#include <random>

namespace cpi {

inline constexpr int kGenerationRetries = 10'000;

/// Random instance with a DP-verified label.
///
/// YES: draw n-1 values, give them random signs and append the absolute
/// signed sum as the balancing element (rejected when it is 0 or above
/// max_mag). NO: rejection sampling. The element order is shuffled so the
/// balancing element does not always sit last.
inline CpiInstance random_instance(std::size_t n, std::uint64_t max_mag, Answer kind, std::uint64_t seed) {
    if (n == 0) throw InvalidInput("random_instance: n must be at least 1");
    if (max_mag == 0) throw InvalidInput("random_instance: max_mag must be at least 1");
    if (kind == Answer::Yes && n < 2) throw InvalidInput("random_instance: a YES-instance needs n >= 2");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> mag(1, max_mag);
    std::bernoulli_distribution coin(0.5);

    for (int attempt = 0; attempt < kGenerationRetries; ++attempt) {
        std::vector<std::uint64_t> values;
        values.reserve(n);
        if (kind == Answer::Yes) {
            std::int64_t signed_sum = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto v = mag(rng);
                values.push_back(v);
                signed_sum += coin(rng) ? static_cast<std::int64_t>(v) : -static_cast<std::int64_t>(v);
            }
            const auto last = static_cast<std::uint64_t>(signed_sum < 0 ? -signed_sum : signed_sum);
            if (last == 0 || last > max_mag) continue;
            values.push_back(last);
            std::shuffle(values.begin(), values.end(), rng);
        } else {
            for (std::size_t i = 0; i < n; ++i) values.push_back(mag(rng));
        }
        CpiInstance inst(std::move(values));
        if (decide_exact(inst) == (kind == Answer::Yes)) return inst;
    }
    throw InvalidInput("random_instance: no " + std::string(to_string(kind)) + "-instance found with n=" +
                       std::to_string(n) + ", max_mag=" + std::to_string(max_mag));
}

}  // namespace cpi
