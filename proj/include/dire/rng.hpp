#pragma once

#include <cstdint>

namespace dire {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Derives an independent 64-bit seed for sub-stream `index` of `seed`
/// (used for per-trial seeds).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index * kGolden + 0x6A09E667F3BCC909ULL));
}

/// Counter-based stream for one protocol round. Round i of a run seeded with
/// `seed` draws from key = derive_seed(seed, i); the k-th draw (k = 1, 2, ...)
/// is mix64(key + k * golden). Streams are therefore reproducible per round
/// regardless of how many draws earlier rounds consumed.
class RoundStream {
public:
    constexpr RoundStream(std::uint64_t seed, std::uint64_t round) : key_(derive_seed(seed, round)) {}

    constexpr std::uint64_t next() { return mix64(key_ + (++counter_) * kGolden); }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace dire
