#include <doctest.h>

#include <cmath>

#include "dire/errors.hpp"
#include "dire/extractor.hpp"
#include "support.hpp"

using namespace dire;

namespace {

// Largest fraction of seeds on which two distinct inputs collide.
double worst_collision(std::size_t n_in, std::size_t l) {
    const std::size_t seed_len = n_in + l - 1;
    std::uint64_t worst = 0;
    for (std::uint64_t d = 1; d < (1ULL << n_in); ++d) {
        BitString diff(n_in);
        for (std::size_t j = 0; j < n_in; ++j) diff.set(j, (d >> j) & 1);
        std::uint64_t hits = 0;
        for (std::uint64_t s = 0; s < (1ULL << seed_len); ++s) {
            BitString seed(seed_len);
            for (std::size_t k = 0; k < seed_len; ++k) seed.set(k, (s >> k) & 1);
            hits += toeplitz_direct(diff, seed, l) == BitString(l);
        }
        worst = std::max(worst, hits);
    }
    return static_cast<double>(worst) / static_cast<double>(1ULL << seed_len);
}

}  // namespace

TEST_CASE("entropy loss matches high-precision values") {
    CHECK(extractor_loss(1e-15, 1e-15) == doctest::Approx(198.31568569324174087).epsilon(1e-14));
    CHECK(output_length(1e6, 1e-15, 1e-15) == 999801);
    CHECK(extractor_loss(1e-3, 0.5) == doctest::Approx(std::log2(1 + 2 / 1e-6)).epsilon(1e-14));
}

TEST_CASE("hash family too weak") {
    try {
        extractor_loss(1e-3, 0.25, 1.25);
        FAIL("expected rejection");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("hash family too weak") != std::string::npos);
    }
    CHECK_THROWS_AS(output_length(1000, 1e-3, 0.25, 1.5), DomainError);
    CHECK_THROWS_AS(extractor_loss(0.0, 0.25), InvariantError);
}

TEST_CASE("output length at the loss is zero") {
    const double loss = extractor_loss(1e-6, 1e-6);
    CHECK(output_length(loss, 1e-6, 1e-6) == 0);
    CHECK(output_length(loss / 2, 1e-6, 1e-6) == 0);
    CHECK(output_length(loss + 1, 1e-6, 1e-6) == 1);
    CHECK_THROWS_AS(output_length(0.0, 1e-6, 1e-6), InvariantError);
}

TEST_CASE("property: output length is floor(k - loss)") {
    testing::Gen gen(43);
    for (int k = 0; k < 5000; ++k) {
        const double e1 = gen.log_real(1e-20, 0.5), e2 = gen.log_real(1e-20, 0.5);
        const double kk = gen.log_real(1.0, 1e9);
        const double expected = std::floor(kk - extractor_loss(e1, e2));
        CHECK(output_length(kk, e1, e2) == (expected > 0 ? static_cast<std::uint64_t>(expected) : 0));
    }
}

TEST_CASE("hand-computed Toeplitz product") {
    const BitString seed = BitString::from_string("1011");
    const BitString input = BitString::from_string("101");
    CHECK(toeplitz_direct(input, seed, 2).to_string() == "01");
    CHECK(toeplitz_fft(input, seed, 2).to_string() == "01");
    ExtractorSpec spec = ExtractorSpec::with_even_split(3, 2, 1e-3);
    CHECK(extract(input, seed, spec).to_string() == "01");
}

TEST_CASE("zero input maps to zero output") {
    testing::Gen gen(47);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = gen.integer(1, 300), l = gen.integer(1, 200);
        CHECK(toeplitz_direct(BitString(n), gen.bits(n + l - 1), l) == BitString(l));
    }
}

TEST_CASE("property: linearity") {
    testing::Gen gen(53);
    for (int k = 0; k < 500; ++k) {
        const std::size_t n = gen.integer(1, 300), l = gen.integer(1, 200);
        const BitString seed = gen.bits(n + l - 1);
        const BitString x = gen.bits(n), y = gen.bits(n);
        CHECK(toeplitz_direct(x ^ y, seed, l) == (toeplitz_direct(x, seed, l) ^ toeplitz_direct(y, seed, l)));
    }
}

TEST_CASE("property: direct and FFT routes agree") {
    testing::Gen gen(59);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = gen.integer(1, 2000), l = gen.integer(1, 700);
        const BitString seed = gen.bits(n + l - 1), x = gen.bits(n);
        CHECK(toeplitz_direct(x, seed, l) == toeplitz_fft(x, seed, l));
    }
}

TEST_CASE("direct route matches the matrix definition") {
    testing::Gen gen(61);
    for (int k = 0; k < 300; ++k) {
        const std::size_t n = gen.integer(1, 150), l = gen.integer(1, 90);
        const BitString seed = gen.bits(n + l - 1), x = gen.bits(n);
        BitString expected(l);
        for (std::size_t i = 0; i < l; ++i) {
            bool acc = false;
            for (std::size_t j = 0; j < n; ++j) {
                const bool t = i >= j ? seed.get(i - j) : seed.get(l + (j - i) - 1);
                acc ^= t && x.get(j);
            }
            expected.set(i, acc);
        }
        CHECK(toeplitz_direct(x, seed, l) == expected);
    }
}

TEST_CASE("exhaustive two-universality") {
    CHECK(worst_collision(6, 3) == 0.125);
    for (std::size_t n = 1; n <= 8; ++n)
        for (std::size_t l = 1; l <= 4; ++l) CHECK(worst_collision(n, l) <= std::ldexp(1.0, -static_cast<int>(l)));
}

TEST_CASE("output bits are balanced on high-entropy inputs") {
    testing::Gen gen(67);
    const std::size_t n = 16, l = 4;
    const int trials = 100000;
    std::vector<int> ones(l, 0);
    const BitString fixed = gen.bits(n);
    for (int t = 0; t < trials; ++t) {
        BitString x = fixed;
        for (std::size_t j = 0; j < 8; ++j) x.set(2 * j, gen.coin());  // 8 bits of min-entropy
        const BitString out = toeplitz_direct(x, gen.bits(n + l - 1), l);
        for (std::size_t i = 0; i < l; ++i) ones[i] += out.get(i);
    }
    const double sigma = std::sqrt(trials * 0.25);
    for (int c : ones) CHECK(std::abs(c - trials / 2.0) <= 4 * sigma);
}

TEST_CASE("extract checks lengths") {
    const ExtractorSpec spec = ExtractorSpec::with_even_split(10, 4, 1e-6);
    CHECK(spec.seed_len() == 13);
    CHECK(spec.eps_ext() == doctest::Approx(1e-6));
    CHECK_THROWS_AS(extract(BitString(9), BitString(13), spec), InvariantError);
    CHECK_THROWS_AS(extract(BitString(10), BitString(12), spec), InvariantError);
    CHECK_THROWS_AS(toeplitz_direct(BitString(0), BitString(3), 4), InvariantError);
    const ExtractorSpec none = ExtractorSpec::with_even_split(10, 0, 1e-6);
    CHECK(extract(BitString(10), BitString(9), none).size() == 0);
}

TEST_CASE("bit stream serialization") {
    testing::Gen gen(71);
    for (std::size_t n : {0, 1, 7, 8, 9, 64, 65, 1000}) {
        const BitString b = gen.bits(n);
        const auto bytes = encode_bitstream(b);
        CHECK(bytes.size() == 8 + (n + 7) / 8);
        CHECK(decode_bitstream(bytes) == b);
    }
    const BitString b = BitString::from_string("1101");
    const auto bytes = encode_bitstream(b);
    CHECK(bytes[0] == 4);
    CHECK(bytes[8] == 0x0B);
    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_bitstream(truncated), SchemaError);
    CHECK_THROWS_AS(decode_bitstream({1, 2, 3}), SchemaError);
    CHECK(bits_from_raw({0x01, 0x80}).to_string() == "1000000000000001");
    CHECK(BitString::from_string("0110").to_string() == "0110");
    CHECK_THROWS(BitString::from_string("01x"));
}
