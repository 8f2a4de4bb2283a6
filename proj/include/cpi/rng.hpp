#pragma once

#include <cstdint>

namespace cpi {

/// SplitMix64 finalizer; derives independent sub-stream seeds from one
/// user seed (source errors, per-stage noise, per-instance batch jobs).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Named sub-streams.
enum class Stream : std::uint64_t { Sources = 1, Noise = 1000, Batch = 1'000'000 };

constexpr std::uint64_t sub_seed(std::uint64_t seed, Stream s, std::uint64_t index = 0) {
    return mix_seed(seed, static_cast<std::uint64_t>(s) + index);
}

}  // namespace cpi
