#include "dire/extractor.hpp"

#include <bit>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "dire/errors.hpp"

namespace dire {

namespace {

// Above this many matrix entries the FFT route is used.
constexpr double kDirectLimit = 4.0e9;

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Diagonal sequence D[k] = t_{k - (n-1)}, k = 0 .. n + l - 2, so that
// T[i][j] = D[i - j + n - 1].
BitString diagonals(const BitString& seed, std::uint64_t n, std::uint64_t l) {
    BitString d(n + l - 1);
    for (std::uint64_t k = 0; k < n + l - 1; ++k) {
        const auto off = static_cast<std::int64_t>(k) - static_cast<std::int64_t>(n - 1);
        const std::uint64_t idx = off >= 0 ? static_cast<std::uint64_t>(off)
                                           : static_cast<std::uint64_t>(static_cast<std::int64_t>(l) - off - 1);
        d.set(k, seed.get(idx));
    }
    return d;
}

void check_lengths(const BitString& input, const BitString& seed, std::uint64_t l) {
    if (input.size() == 0) throw InvariantError("input_bits", "input must be non-empty");
    if (l == 0) throw InvariantError("output_len", "output length must be positive");
    if (seed.size() != input.size() + l - 1)
        throw InvariantError("seed_bits", "seed must have input_len + output_len - 1 = " +
                                              std::to_string(input.size() + l - 1) + " bits");
}

}  // namespace

void ExtractorSpec::validate() const {
    if (output_len > 0 && input_len == 0) throw InvariantError("input_len", "must be positive");
    if (!(delta_h >= 1.0)) throw InvariantError("delta_h", "must be at least 1");
    if (!(eps_prime > 0.0) || !(eps_dprime > 0.0)) throw InvariantError("eps_ext", "eps' and eps'' must be positive");
    if (!(4.0 * eps_dprime * eps_dprime + (1.0 - delta_h) > 0.0))
        throw DomainError("hash family too weak for target eps''");
}

ExtractorSpec ExtractorSpec::with_even_split(std::uint64_t input_len, std::uint64_t output_len, double eps_ext) {
    ExtractorSpec s;
    s.input_len = input_len;
    s.output_len = output_len;
    s.eps_prime = eps_ext / 2.0;
    s.eps_dprime = eps_ext / 2.0;
    return s;
}

double extractor_loss(double eps_prime, double eps_dprime, double delta_h) {
    if (!(eps_prime > 0.0)) throw InvariantError("eps_prime", "must be positive");
    const double slack = 4.0 * eps_dprime * eps_dprime + (1.0 - delta_h);
    if (!(slack > 0.0)) throw DomainError("hash family too weak for target eps''");
    // log2(1 + 2/e^2) = log2(e^2 + 2) - 2 log2(e), stable for tiny e.
    const double first = std::log2(eps_prime * eps_prime + 2.0) - 2.0 * std::log2(eps_prime);
    return first - std::log2(slack);
}

std::uint64_t output_length(double k_ext, double eps_prime, double eps_dprime, double delta_h) {
    if (!(k_ext > 0.0)) throw InvariantError("k_ext", "must be positive");
    const double l = std::floor(k_ext - extractor_loss(eps_prime, eps_dprime, delta_h));
    return l > 0.0 ? static_cast<std::uint64_t>(l) : 0;
}

BitString toeplitz_direct(const BitString& input, const BitString& seed, std::uint64_t l) {
    check_lengths(input, seed, l);
    const std::uint64_t n = input.size();
    BitString d = diagonals(seed, n, l);
    d.words().push_back(0);  // room for the two-word window read

    BitString reversed(n);
    for (std::uint64_t j = 0; j < n; ++j) reversed.set(j, input.get(n - 1 - j));
    const auto& r = reversed.words();
    const auto& dw = d.words();

    BitString out(l);
    for (std::uint64_t i = 0; i < l; ++i) {
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < r.size(); ++w) {
            const std::uint64_t pos = i + 64 * w;
            const std::size_t word = pos >> 6;
            const unsigned shift = pos & 63;
            std::uint64_t window = dw[word] >> shift;
            if (shift != 0) window |= dw[word + 1] << (64 - shift);
            acc ^= window & r[w];
        }
        out.set(i, std::popcount(acc) & 1);
    }
    return out;
}

BitString toeplitz_fft(const BitString& input, const BitString& seed, std::uint64_t l) {
    check_lengths(input, seed, l);
    const std::uint64_t n = input.size();
    const BitString d = diagonals(seed, n, l);
    const std::size_t size = static_cast<std::size_t>(2 * n + l - 2);
    const std::size_t spectrum = size / 2 + 1;

    double* a = fftw_alloc_real(size);
    double* b = fftw_alloc_real(size);
    fftw_complex* fa = fftw_alloc_complex(spectrum);
    fftw_complex* fb = fftw_alloc_complex(spectrum);
    fftw_plan pa, pb, inv;
    {
        std::lock_guard lock(fftw_planner_mutex());
        const int len = static_cast<int>(size);
        pa = fftw_plan_dft_r2c_1d(len, a, fa, FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_1d(len, b, fb, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(len, fa, a, FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k < size; ++k) {
        a[k] = k < d.size() && d.get(k) ? 1.0 : 0.0;
        b[k] = k < n && input.get(k) ? 1.0 : 0.0;
    }
    fftw_execute(pa);
    fftw_execute(pb);
    for (std::size_t k = 0; k < spectrum; ++k) {
        const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
        const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
        fa[k][0] = re;
        fa[k][1] = im;
    }
    fftw_execute(inv);

    BitString out(l);
    for (std::uint64_t i = 0; i < l; ++i) {
        const auto count = static_cast<std::uint64_t>(std::llround(a[i + n - 1] / static_cast<double>(size)));
        out.set(i, count & 1);
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(inv);
    }
    fftw_free(a);
    fftw_free(b);
    fftw_free(fa);
    fftw_free(fb);
    return out;
}

BitString extract(const BitString& input, const BitString& seed, const ExtractorSpec& spec) {
    if (input.size() != spec.input_len)
        throw InvariantError("input_bits", "expected " + std::to_string(spec.input_len) + " bits");
    if (spec.output_len == 0) return BitString{};
    if (seed.size() != spec.seed_len())
        throw InvariantError("seed_bits", "expected " + std::to_string(spec.seed_len()) + " bits");
    const double entries = static_cast<double>(spec.input_len) * static_cast<double>(spec.output_len);
    return entries <= kDirectLimit ? toeplitz_direct(input, seed, spec.output_len)
                                   : toeplitz_fft(input, seed, spec.output_len);
}

}  // namespace dire
