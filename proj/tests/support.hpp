#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dire/bitstream.hpp"

namespace dire::testing {

inline std::string fixture(const std::string& name) { return std::string(DIRE_FIXTURE_DIR) + "/" + name; }

/// Seeded value generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double log_real(double lo, double hi) { return std::exp(real(std::log(lo), std::log(hi))); }
    std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
    }
    bool coin() { return integer(0, 1) == 1; }

    BitString bits(std::size_t n) {
        BitString b(n);
        for (std::size_t i = 0; i < n; ++i) b.set(i, coin());
        return b;
    }

private:
    std::mt19937_64 engine_;
};

inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace dire::testing
