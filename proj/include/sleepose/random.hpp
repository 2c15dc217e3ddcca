// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace sleepose {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic child seed for stream `stream` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

// Stream tags so different consumers of one seed never share a sequence.
namespace streams {
inline constexpr std::uint64_t kTrainAugment = 0x1000;
inline constexpr std::uint64_t kTestAugment = 0x2000;
inline constexpr std::uint64_t kTuning = 0x3000;
inline constexpr std::uint64_t kShotSelection = 0x4000;
inline constexpr std::uint64_t kPostures = 0x5000;
inline constexpr std::uint64_t kImuNoise = 0x6000;
inline constexpr std::uint64_t kSessions = 0x7000;
inline constexpr std::uint64_t kRepeat = 0x8000;
inline constexpr std::uint64_t kSubsample = 0x9000;
}  // namespace streams

}  // namespace sleepose
