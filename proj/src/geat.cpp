#include "dire/geat.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>
#include <thread>
#include <tuple>

#include "dire/errors.hpp"
#include "dire/extractor.hpp"

namespace dire {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// log2(1 - sqrt(1 - eps^2)) without cancellation.
double log2_smoothing(double eps) {
    return 2.0 * std::log2(eps) - std::log2(1.0 + std::sqrt(1.0 - eps * eps));
}

// ln(2^e + e^2), safe for large e.
double ln_zeta_plus_e2(double exponent) {
    const double a = exponent * kLn2;
    const double hi = std::max(a, 2.0);
    const double lo = std::min(a, 2.0);
    return hi + std::log1p(std::exp(lo - hi));
}

double log2_non_abort(std::uint64_t n, double w_tol, double eta_z_prime, std::size_t n_zero) {
    const double nd = static_cast<double>(n);
    double v = std::log2(-std::expm1(-2.0 * w_tol * w_tol * nd));
    if (n_zero > 0) v += static_cast<double>(n_zero) * std::log2(-std::expm1(-2.0 * eta_z_prime * eta_z_prime * nd));
    return v;
}

void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw InvariantError("beta", "must lie in (0, 1)");
}

void check_pr(double pr_omega) {
    if (!(pr_omega > 0.0 && pr_omega <= 1.0)) throw InvariantError("pr_omega", "must lie in (0, 1]");
}

}  // namespace

ProtocolParams ProtocolParams::defaults(const ZeroClass& zero_class, RandType rand_type) {
    ProtocolParams p;
    p.zero_class = zero_class;
    p.rand_type = rand_type;
    p.d_k = default_d_k(rand_type);
    p.w_exp = winning_probability(correlation(strategy_for_class(zero_class)));
    p.eta_z_prime = p.eta_z / 2.0;
    return p;
}

void ProtocolParams::validate() const {
    if (n < 1) throw InvariantError("n", "must be at least 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvariantError("gamma", "must lie in (0, 1]");
    if (!(w_exp >= 0.0 && w_exp <= 1.0)) throw InvariantError("w_exp", "must be a probability");
    if (!(w_tol > 0.0 && w_tol < 1.0)) throw InvariantError("w_tol", "must lie in (0, 1)");
    if (!(eta_z > 0.0 && eta_z < 1.0)) throw InvariantError("eta_z", "must lie in (0, 1)");
    if (!(eta_z_prime > 0.0 && eta_z_prime < eta_z)) throw InvariantError("eta_z_prime", "must lie in (0, eta_z)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvariantError("epsilon", "must lie in (0, 1)");
    if (!(epsilon_ext > 0.0 && epsilon_ext < 1.0)) throw InvariantError("epsilon_ext", "must lie in (0, 1)");
    if (!(input_dist_entropy >= 0.0)) throw InvariantError("input_dist_entropy", "must be nonnegative");
    if (d_k < 2) throw InvariantError("d_k", "must be at least 2");
}

DeltaTerms correction_terms(const TradeoffProperties& props, double lambda, const ProtocolParams& params,
                            double beta, double pr_omega) {
    (void)lambda;  // enters through props (max_f, min_sigma, var_sigma)
    check_beta(beta);
    check_pr(pr_omega);
    const double nd = static_cast<double>(params.n);
    const double dk = params.d_k;
    const double v = std::sqrt(2.0 + props.var_sigma);
    const double head = std::log2(2.0 * dk * dk + 1.0) + v;

    DeltaTerms t;
    t.variance = kLn2 / 2.0 * beta * head * head;
    t.finite_size = -(1.0 / nd) * ((1.0 + beta) / beta * log2_smoothing(params.epsilon) +
                                   (1.0 + 2.0 * beta) / beta * std::log2(pr_omega));
    const double exponent = 2.0 * std::log2(dk) + props.max_f - props.min_sigma;
    const double ln_term = ln_zeta_plus_e2(exponent);
    t.higher_order = 1.0 / (6.0 * kLn2) * beta * beta / std::pow(1.0 - beta, 3) * std::exp2(beta * exponent) *
                     ln_term * ln_term * ln_term;
    return t;
}

double correction_delta(const TradeoffProperties& props, double lambda, const ProtocolParams& params, double beta,
                        double pr_omega) {
    return correction_terms(props, lambda, params, beta, pr_omega).total();
}

double correction_delta_alpha(const TradeoffProperties& props, const ProtocolParams& params, double alpha,
                              double pr_omega) {
    if (!(alpha > 1.0 && alpha < 1.5)) throw InvariantError("alpha", "must lie in (1, 3/2)");
    check_pr(pr_omega);
    const double nd = static_cast<double>(params.n);
    const double dk = params.d_k;
    const double ratio = (alpha - 1.0) / (2.0 - alpha);

    const double v = std::log2(2.0 * dk * dk + 1.0) + std::sqrt(2.0 + props.var_sigma);
    const double g_eps = -log2_smoothing(params.epsilon);
    const double spread = 2.0 * std::log2(dk) + props.max_f - props.min_sigma;
    const double ln_term = ln_zeta_plus_e2(spread);
    const double k_prime = std::pow(2.0 - alpha, 3) / (6.0 * std::pow(3.0 - 2.0 * alpha, 3) * kLn2) *
                           std::exp2(ratio * spread) * ln_term * ln_term * ln_term;

    // n h - [this] * n is the smooth min-entropy bound.
    return ratio * kLn2 / 2.0 * v * v + (g_eps + alpha * -std::log2(pr_omega)) / ((alpha - 1.0) * nd) +
           ratio * ratio * k_prime;
}

double non_abort_bound(std::uint64_t n, double w_tol, double eta_z_prime, std::size_t n_zero) {
    if (n == 0) return 0.0;
    return std::exp2(log2_non_abort(n, w_tol, eta_z_prime, n_zero));
}

double completeness_bound(std::uint64_t n, double w_tol, double eta_z_prime, std::size_t n_zero) {
    if (n == 0) return 1.0;
    return 0.0 - std::expm1(log2_non_abort(n, w_tol, eta_z_prime, n_zero) * kLn2);
}

double completeness(const ProtocolParams& p) {
    return completeness_bound(p.n, p.w_tol, p.eta_z_prime, p.zero_class.n_zero());
}

double soundness(const ProtocolParams& p) { return p.epsilon_ext + 2.0 * p.epsilon; }

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double input_consumption(const ProtocolParams& p) {
    return p.gamma * p.input_dist_entropy + binary_entropy(p.gamma);
}

RateBreakdown finite_rate(const DualCertificate& cert, const ProtocolParams& params, double beta, double nu_prime) {
    params.validate();
    check_beta(beta);
    if (cert.zero_class.label != params.zero_class.label)
        throw InvariantError("class", "certificate is for class " + cert.zero_class.name() + ", parameters for " +
                                          params.zero_class.name());
    if (cert.rand_type != params.rand_type)
        throw InvariantError("rand_type", "certificate is for " + to_string(cert.rand_type) + " randomness");

    RateBreakdown r;
    r.n = params.n;
    r.gamma = params.gamma;
    r.beta = beta;
    r.nu_prime = nu_prime;

    const auto eval = evaluate_certificate(cert, params.w_exp - params.w_tol, params.eta_z);
    r.h = eval.value;
    r.warnings = eval.warnings;

    const MinTradeoff f = build_min_tradeoff(cert, params.eta_z);
    const CrossoverTradeoff cf = crossover(f, params.gamma, nu_prime);
    const TradeoffProperties props = properties(cf);

    r.pr_omega_bound = non_abort_bound(params.n, params.w_tol, params.eta_z_prime, params.zero_class.n_zero());
    r.delta = correction_delta(props, f.lambda, params, beta, r.pr_omega_bound);
    r.delta_ext = extractor_loss(params.epsilon_ext / 2.0, params.epsilon_ext / 2.0) / static_cast<double>(params.n);
    r.delta_inp = input_consumption(params);
    r.raw_rate = r.h - r.delta - r.delta_ext - r.delta_inp;
    r.rate = std::max(0.0, r.raw_rate);
    r.smooth_min_entropy_total = static_cast<double>(params.n) * (r.h - r.delta);
    r.epsilon_c = completeness(params);
    r.epsilon_s = soundness(params);
    return r;
}

std::vector<double> log_grid(double lo, double hi, int count) {
    if (count == 1) return {lo};
    std::vector<double> g(count);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * i / (count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
    if (count == 1) return {lo};
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    g.back() = hi;
    return g;
}

std::vector<double> default_beta_grid() { return log_grid(1e-6, 0.9, 50); }
std::vector<double> default_nu_grid() { return linear_grid(0.0, 1.0, 21); }

std::vector<RateBreakdown> scan(const DualCertificate& cert, const ProtocolParams& params, const ScanGrids& grids) {
    if (grids.beta.empty() || grids.nu_prime.empty() || grids.gamma.empty())
        throw InvariantError("grid", "scan grids must be non-empty");
    const std::size_t nb = grids.beta.size(), nn = grids.nu_prime.size(), ng = grids.gamma.size();
    const std::size_t total = nb * nn * ng;
    std::vector<RateBreakdown> out(total);
    std::vector<std::exception_ptr> errors(total);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t ig = k / (nb * nn);
            const std::size_t ib = (k / nn) % nb;
            const std::size_t in = k % nn;
            ProtocolParams p = params;
            p.gamma = grids.gamma[ig];
            try {
                out[k] = finite_rate(cert, p, grids.beta[ib], grids.nu_prime[in]);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    if (workers == 1 || total < 64) {
        work(0, total);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (total + workers - 1) / workers;
        for (std::size_t begin = 0; begin < total; begin += chunk)
            pool.emplace_back(work, begin, std::min(total, begin + chunk));
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

RateBreakdown optimize(const DualCertificate& cert, const ProtocolParams& params, const ScanGrids& grids) {
    const auto all = scan(cert, params, grids);
    auto key = [](const RateBreakdown& r) { return std::tuple(r.beta, r.nu_prime, r.gamma); };
    const RateBreakdown* best = &all.front();
    for (const auto& r : all) {
        if (r.raw_rate > best->raw_rate || (r.raw_rate == best->raw_rate && key(r) < key(*best))) best = &r;
    }
    return *best;
}

nlohmann::json params_to_json(const ProtocolParams& p) {
    return nlohmann::json{{"n", p.n},
                          {"gamma", p.gamma},
                          {"w_exp", p.w_exp},
                          {"w_tol", p.w_tol},
                          {"eta_z", p.eta_z},
                          {"eta_z_prime", p.eta_z_prime},
                          {"epsilon", p.epsilon},
                          {"epsilon_ext", p.epsilon_ext},
                          {"rand_type", to_string(p.rand_type)},
                          {"class", p.zero_class.name()},
                          {"input_dist_entropy", p.input_dist_entropy},
                          {"d_k", p.d_k}};
}

ProtocolParams params_from_json(const nlohmann::json& j) {
    try {
        ProtocolParams p;
        p.n = j.at("n").get<std::uint64_t>();
        p.gamma = j.at("gamma").get<double>();
        p.w_exp = j.at("w_exp").get<double>();
        p.w_tol = j.at("w_tol").get<double>();
        p.eta_z = j.at("eta_z").get<double>();
        p.eta_z_prime = j.at("eta_z_prime").get<double>();
        p.epsilon = j.at("epsilon").get<double>();
        p.epsilon_ext = j.at("epsilon_ext").get<double>();
        p.rand_type = parse_rand_type(j.at("rand_type").get<std::string>());
        p.zero_class = ZeroClass::parse(j.at("class").get<std::string>());
        p.input_dist_entropy = j.at("input_dist_entropy").get<double>();
        p.d_k = j.at("d_k").get<int>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("protocol parameters: ") + e.what());
    }
}

void write_rate_csv_header(std::ostream& out) {
    out << "# schema: " << kRateCsvSchema << "\n"
        << "n,gamma,beta,nu_prime,h,delta,delta_inp,delta_ext,rate,epsilon_c,epsilon_s\n";
}

void write_rate_csv_row(std::ostream& out, const RateBreakdown& r) {
    const auto old = out.precision(17);
    out << r.n << ',' << r.gamma << ',' << r.beta << ',' << r.nu_prime << ',' << r.h << ',' << r.delta << ','
        << r.delta_inp << ',' << r.delta_ext << ',' << r.rate << ',' << r.epsilon_c << ',' << r.epsilon_s << '\n';
    out.precision(old);
}

}  // namespace dire
