#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dire/tradeoff.hpp"

namespace dire {

struct ProtocolParams {
    std::uint64_t n = 1;
    double gamma = 1.0;
    double w_exp = 0.0;
    double w_tol = 1e-4;
    double eta_z = 1e-3;
    double eta_z_prime = 5e-4;
    double epsilon = 1e-12;
    double epsilon_ext = 1e-15;
    RandType rand_type = RandType::local;
    ZeroClass zero_class;
    double input_dist_entropy = 2.0;  // Shannon entropy of P(x, y) in bits
    int d_k = 2;                      // output alphabet per round

    /// Defaults for a class and randomness type: w_exp at the class's honest
    /// score, eta_z' = eta_z / 2, d_k = 4 for global and 2 otherwise.
    static ProtocolParams defaults(const ZeroClass& zero_class, RandType rand_type);

    static int default_d_k(RandType t) { return t == RandType::global ? 4 : 2; }

    /// Throws InvariantError naming the first invalid field.
    void validate() const;
};

struct RateBreakdown {
    std::uint64_t n = 0;
    double gamma = 0.0;
    double beta = 0.0;
    double nu_prime = 0.0;
    double h = 0.0;
    double delta = 0.0;
    double delta_ext = 0.0;  // per round: extractor loss / n
    double delta_inp = 0.0;
    double raw_rate = 0.0;   // h - delta - delta_ext - delta_inp
    double rate = 0.0;       // raw_rate clamped below at 0
    double smooth_min_entropy_total = 0.0;
    double epsilon_c = 0.0;
    double epsilon_s = 0.0;
    double pr_omega_bound = 0.0;
    std::vector<std::string> warnings;
};

/// The three pieces of the finite-size correction.
struct DeltaTerms {
    double variance = 0.0;      // (ln2/2) beta [log2(2 d_k^2 + 1) + V]^2
    double finite_size = 0.0;   // -(1/n)[...] from smoothing and Pr[Omega]
    double higher_order = 0.0;  // beta^2/(1-beta)^3 zeta^beta ln^3(zeta + e^2) / (6 ln 2)

    double total() const { return variance + finite_size + higher_order; }
};

DeltaTerms correction_terms(const TradeoffProperties& props, double lambda, const ProtocolParams& params,
                            double beta, double pr_omega);

/// Per-round correction written in terms of beta.
double correction_delta(const TradeoffProperties& props, double lambda, const ProtocolParams& params,
                        double beta, double pr_omega);

/// The same correction written with the Renyi order alpha = (1+2beta)/(1+beta)
/// as it appears in the entropy accumulation bound. Independent code path used
/// to cross-check `correction_delta`.
double correction_delta_alpha(const TradeoffProperties& props, const ProtocolParams& params, double alpha,
                              double pr_omega);

/// Lower bound on the honest non-abort probability
///   (1 - e^{-2 w_tol^2 n}) (1 - e^{-2 eta'^2 n})^{n_zero}.
double non_abort_bound(std::uint64_t n, double w_tol, double eta_z_prime, std::size_t n_zero);
double completeness_bound(std::uint64_t n, double w_tol, double eta_z_prime, std::size_t n_zero);

double completeness(const ProtocolParams& params);
double soundness(const ProtocolParams& params);
double input_consumption(const ProtocolParams& params);
double binary_entropy(double p);

RateBreakdown finite_rate(const DualCertificate& cert, const ProtocolParams& params, double beta,
                          double nu_prime);

struct ScanGrids {
    std::vector<double> beta;
    std::vector<double> nu_prime;
    std::vector<double> gamma;
};

/// 50 log-spaced beta in [1e-6, 0.9].
std::vector<double> default_beta_grid();
/// 21 evenly spaced nu' in [0, 1].
std::vector<double> default_nu_grid();
std::vector<double> log_grid(double lo, double hi, int count);
std::vector<double> linear_grid(double lo, double hi, int count);

/// Every grid point, in (gamma, beta, nu') row-major order. Points are
/// evaluated concurrently; the output order does not depend on scheduling.
std::vector<RateBreakdown> scan(const DualCertificate& cert, const ProtocolParams& params, const ScanGrids& grids);

/// Best point of `scan` by raw rate; ties go to the lexicographically
/// smallest (beta, nu', gamma).
RateBreakdown optimize(const DualCertificate& cert, const ProtocolParams& params, const ScanGrids& grids);

nlohmann::json params_to_json(const ProtocolParams& p);
ProtocolParams params_from_json(const nlohmann::json& j);

inline constexpr const char* kRateCsvSchema = "rate_scan_v1";
void write_rate_csv_header(std::ostream& out);
void write_rate_csv_row(std::ostream& out, const RateBreakdown& r);

}  // namespace dire
