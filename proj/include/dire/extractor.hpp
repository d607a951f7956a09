#pragma once

#include <cstdint>

#include "dire/bitstream.hpp"

namespace dire {

/// Strong extractor built from a (delta_h-almost) two-universal family.
/// The shipped family is Toeplitz hashing, which has delta_h = 1 and a seed
/// of input_len + output_len - 1 bits.
struct ExtractorSpec {
    std::uint64_t input_len = 0;
    std::uint64_t output_len = 0;
    double delta_h = 1.0;
    double eps_prime = 0.0;
    double eps_dprime = 0.0;

    double eps_ext() const { return eps_prime + eps_dprime; }
    std::uint64_t seed_len() const { return input_len + output_len - 1; }

    void validate() const;

    /// Even split eps' = eps'' = eps_ext / 2.
    static ExtractorSpec with_even_split(std::uint64_t input_len, std::uint64_t output_len, double eps_ext);
};

/// Entropy lost to extraction:
///   log2(1 + 2/eps'^2) + log2(1 / (4 eps''^2 - delta_h + 1)).
/// Throws DomainError when 4 eps''^2 - delta_h + 1 <= 0.
double extractor_loss(double eps_prime, double eps_dprime, double delta_h = 1.0);

/// floor(k_ext - extractor_loss), clamped at zero.
std::uint64_t output_length(double k_ext, double eps_prime, double eps_dprime, double delta_h = 1.0);

/// T(seed) * input over GF(2); T is the output_len x input_len Toeplitz
/// matrix with T[i][0] = seed[i] and T[0][j] = seed[output_len + j - 1].
BitString extract(const BitString& input, const BitString& seed, const ExtractorSpec& spec);

/// The two evaluation routes behind `extract`, exposed for cross-checking.
BitString toeplitz_direct(const BitString& input, const BitString& seed, std::uint64_t output_len);
BitString toeplitz_fft(const BitString& input, const BitString& seed, std::uint64_t output_len);

}  // namespace dire
