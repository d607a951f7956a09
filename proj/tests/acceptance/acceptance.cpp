// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dire/extractor.hpp"
#include "dire/geat.hpp"
#include "dire/protocol.hpp"
#include "dire/quadrature.hpp"
#include "dire/tradeoff.hpp"
#include "support.hpp"

using namespace dire;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

Outcome completeness_value() {
    const double eps_c = completeness_bound(10000000, 1e-4, 5e-4, 3);
    return {std::abs(eps_c - 0.8223) <= 5e-4, "eps_c = " + fmt(eps_c)};
}

Outcome soundness_value() {
    ProtocolParams p;
    p.epsilon = 1e-12;
    p.epsilon_ext = 1e-15;
    const double eps_s = soundness(p);
    const bool exact = eps_s == p.epsilon_ext + 2 * p.epsilon;
    return {exact && std::abs(eps_s - 2e-12) <= 2e-15, "eps_s = " + fmt(eps_s)};
}

Outcome honest_scores() {
    struct Row {
        const char* label;
        double table;
        double tol;
    };
    const Row rows[] = {{"1", 0.8294, 1e-3}, {"2a", 0.8125, 1e-6}, {"2b", 0.8125, 1e-6},
                        {"2c", 0.8039, 1e-3}, {"3a", 0.7951, 1e-3}, {"3b", 0.7837, 1e-3}};
    bool ok = true;
    double worst_zero = 0.0;
    std::string detail;
    for (const auto& r : rows) {
        const ZeroClass zc = ZeroClass::parse(r.label);
        const Behavior b = correlation(strategy_for_class(zc));
        const double w = winning_probability(b);
        ok = ok && std::abs(w - r.table) <= r.tol;
        for (double z : zero_violations(b, zc)) worst_zero = std::max(worst_zero, z);
        detail += std::string(r.label) + "=" + fmt(w) + " ";
    }
    ok = ok && worst_zero <= 1e-9;
    return {ok, detail + "max zero prob " + fmt(worst_zero)};
}

Outcome crossover_identity() {
    testing::Gen gen(101);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const MinTradeoff f{gen.real(0.0, 30.0), gen.real(-25.0, 2.0)};
        const double gamma = gen.log_real(1e-2, 1.0), nu_prime = gen.real(0.0, 1.0), q = gen.real(0.0, 1.0);
        const CrossoverTradeoff cf = crossover(f, gamma, nu_prime);
        // error relative to the largest value the sum handles
        const double scale = std::max({1.0, std::abs(cf.on_test(0)), std::abs(cf.on_test(1)), std::abs(cf.f_perp)});
        worst = std::max(worst, std::abs(cf.on_mixed(q) - f(q)) / scale);
    }
    return {worst <= 1e-12, "worst scaled deviation " + fmt(worst)};
}

double variance_at(const CrossoverTradeoff& cf, double nu) {
    const double g = cf.gamma;
    const double f1 = cf.on_test(1), f0 = cf.on_test(0), fp = cf.on_no_test();
    const double mean = g * nu * f1 + g * (1 - nu) * f0 + (1 - g) * fp;
    return g * nu * f1 * f1 + g * (1 - nu) * f0 * f0 + (1 - g) * fp * fp - mean * mean;
}

Outcome variance_closed_form() {
    testing::Gen gen(103);
    double worst = 0.0;
    const double lo = 1.0 - kQuantumBound, hi = kQuantumBound;
    const int points = 10000;
    for (int k = 0; k < 1000; ++k) {
        const MinTradeoff f{gen.real(0.0, 30.0), gen.real(-25.0, 2.0)};
        const double gamma = gen.log_real(1e-2, 1.0), nu_prime = gen.real(0.0, 1.0);
        const CrossoverTradeoff cf = crossover(f, gamma, nu_prime);
        const double step = (hi - lo) / (points - 1);
        int best = 0;
        double best_v = -1e300;
        for (int i = 0; i < points; ++i) {
            const double v = variance_at(cf, lo + step * i);
            if (v > best_v) best_v = v, best = i;
        }
        const double a = std::max(lo, lo + step * (best - 1)), b = std::min(hi, lo + step * (best + 1));
        for (int i = 0; i <= points; ++i) best_v = std::max(best_v, variance_at(cf, a + (b - a) * i / points));
        const double scale = std::max(1.0, f.lambda * f.lambda / (gamma * gamma));
        worst = std::max(worst, std::abs(properties(cf).var_sigma - best_v) / scale);
    }
    return {worst <= 1e-8, "worst scaled deviation " + fmt(worst)};
}

Outcome zeta_identity() {
    testing::Gen gen(107);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const MinTradeoff f{gen.real(0.0, 30.0), gen.real(-25.0, 2.0)};
        const double gamma = gen.log_real(1e-2, 1.0), nu_prime = gen.real(0.0, 1.0);
        const TradeoffProperties p = properties(crossover(f, gamma, nu_prime));
        const double gamma0 = (1 - gamma) / gamma;
        const double closed = 2 + f.lambda * (gamma0 * (1 - nu_prime) + kQuantumBound);
        const double engine = 2 * std::log2(2.0) + p.max_f - p.min_sigma;
        worst = std::max(worst, std::abs(std::expm1((closed - engine) * std::log(2.0))));
    }
    return {worst <= 1e-10, "worst relative deviation " + fmt(worst)};
}

Outcome quadrature_rules() {
    const Quadrature q = gauss_radau(2);
    const double dev = std::max({std::abs(q.nodes[0] - 1.0 / 3), std::abs(q.nodes[1] - 1.0),
                                 std::abs(q.weights[0] - 0.75), std::abs(q.weights[1] - 0.25)});
    double worst = 0.0;
    for (int m = 2; m <= 18; ++m) {
        const Quadrature r = gauss_radau(m);
        for (int k = 0; k <= 2 * m - 2; ++k) {
            double sum = 0.0;
            for (int i = 0; i < m; ++i) sum += r.weights[i] * std::pow(r.nodes[i], k);
            worst = std::max(worst, std::abs(sum - 1.0 / (k + 1)));
        }
    }
    return {dev <= 1e-15 && worst <= 1e-9, "m=2 deviation " + fmt(dev) + ", worst moment error " + fmt(worst)};
}

Outcome extractor_properties() {
    double worst_ratio = 0.0;
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t l = 1; l <= 4; ++l) {
            const std::size_t seed_len = n + l - 1;
            std::uint64_t worst = 0;
            for (std::uint64_t d = 1; d < (1ULL << n); ++d) {
                BitString diff(n);
                for (std::size_t j = 0; j < n; ++j) diff.set(j, (d >> j) & 1);
                std::uint64_t hits = 0;
                for (std::uint64_t s = 0; s < (1ULL << seed_len); ++s) {
                    BitString seed(seed_len);
                    for (std::size_t k = 0; k < seed_len; ++k) seed.set(k, (s >> k) & 1);
                    hits += toeplitz_direct(diff, seed, l) == BitString(l);
                }
                worst = std::max(worst, hits);
            }
            const double collision = static_cast<double>(worst) / static_cast<double>(1ULL << seed_len);
            worst_ratio = std::max(worst_ratio, collision * std::ldexp(1.0, static_cast<int>(l)));
        }
    }
    testing::Gen gen(109);
    int mismatches = 0;
    for (int k = 0; k < 100000; ++k) {
        const double e1 = gen.log_real(1e-20, 0.5), e2 = gen.log_real(1e-20, 0.5), kk = gen.log_real(1.0, 1e9);
        const double expected = std::max(0.0, std::floor(kk - extractor_loss(e1, e2)));
        mismatches += output_length(kk, e1, e2) != static_cast<std::uint64_t>(expected);
    }
    return {worst_ratio <= 1.0 && mismatches == 0,
            "max collision * 2^l = " + fmt(worst_ratio) + ", length mismatches " + std::to_string(mismatches)};
}

Outcome finite_rate_asymptotics() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"chsh_local.json", "2a_local.json", "2a_global.json", "3b_blind.json"}) {
        const DualCertificate c = load_certificate_file(testing::fixture(name));
        ProtocolParams p = ProtocolParams::defaults(c.zero_class, c.rand_type);
        p.w_exp = c.w_exp;
        p.w_tol = c.w_tol;
        p.gamma = 0.1;
        double previous = -HUGE_VAL, gap = 0.0;
        for (double n = 1e5; n <= 1e12; n *= std::sqrt(10.0)) {
            p.n = static_cast<std::uint64_t>(std::llround(n));
            const RateBreakdown r = finite_rate(c, p, 0.3 / std::sqrt(n), 0.5);
            ok = ok && r.rate >= previous;
            previous = r.rate;
            gap = std::abs(r.raw_rate - (r.h - r.delta_inp));
        }
        ok = ok && gap <= 1e-3;
        detail += std::string(name, std::string(name).find('.')) + " gap " + fmt(gap) + " ";
    }
    return {ok, detail + "at n = 1e12"};
}

Outcome simulator_statistics() {
    ProtocolParams p = ProtocolParams::defaults(ZeroClass::parse("3b"), RandType::local);
    p.n = 100000;
    p.gamma = 1.0;
    p.w_tol = 5e-3;
    p.eta_z = 1e-2;
    p.eta_z_prime = 5e-3;
    const std::uint64_t trials = 1000;
    const auto est = estimate_completeness(strategy_for_class(p.zero_class), p, trials, 20240501);
    const double eps_c = completeness(p);
    const double sigma = std::sqrt(eps_c * (1 - eps_c) / static_cast<double>(trials));
    const double fraction = est.abort_fraction();
    return {fraction <= eps_c + 3 * sigma,
            "abort fraction " + fmt(fraction) + " vs eps_c " + fmt(eps_c) + " + 3 sigma " + fmt(3 * sigma)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"completeness reproduction", 1, completeness_value},
        {"soundness reproduction", 1, soundness_value},
        {"honest-strategy scores", 1, honest_scores},
        {"crossover identity", 1, crossover_identity},
        {"variance closed form", 10, variance_closed_form},
        {"zeta identity", 1, zeta_identity},
        {"quadrature", 1, quadrature_rules},
        {"extractor", 30, extractor_properties},
        {"finite-rate asymptotics", 10, finite_rate_asymptotics},
        {"simulator statistics", 120, simulator_statistics},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                    in_time ? "" : ", over budget");
    }
    return failures == 0 ? 0 : 1;
}
