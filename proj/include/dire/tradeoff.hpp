#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dire/quadrature.hpp"
#include "dire/quantum_model.hpp"

namespace dire {

/// Which randomness the protocol certifies: Alice's output (local), both
/// outputs (global), or Alice's output given Bob's input and output (blind).
enum class RandType { local = 0, global = 1, blind = 2 };

std::string to_string(RandType t);
RandType parse_rand_type(std::string_view s);

inline constexpr const char* kCertificateKey = "di_rand_certificate_v1";

/// Per-term dual variables and primal optima of the quadrature SDPs. The
/// quadrature's endpoint term (index m) is carried analytically, so all term
/// arrays have m - 1 entries.
struct DualCertificate {
    ZeroClass zero_class;
    RandType rand_type = RandType::local;
    double w_exp = 0.0;
    double w_tol = 0.0;
    double eta_z = 0.0;
    Quadrature quadrature;
    std::vector<double> lambda_win_terms;               // lambda_win^i
    std::vector<std::vector<double>> lambda_z_terms;    // [i][j], j over the class constraints
    std::vector<double> primal_terms;                   // Xi*_i
    double gamma_win_star = 0.0;
    std::vector<double> gamma_z_star;
    double asymptotic_rate = 0.0;

    /// The point the dual was solved at: w_exp - w_tol.
    double certified_nu() const { return w_exp - w_tol; }

    /// Shape and range checks plus the dual-feasibility audit. Throws
    /// InvariantError naming the field.
    void validate() const;
};

DualCertificate load_certificate(std::string_view bytes);
DualCertificate load_certificate_file(const std::string& path);
nlohmann::json certificate_to_json(const DualCertificate& cert);

/// f(nu) = lambda * nu + c_lambda.
struct MinTradeoff {
    double lambda = 0.0;
    double c_lambda = 0.0;

    double operator()(double nu) const { return lambda * nu + c_lambda; }
};

/// Aggregates of a certificate, exposed for auditing.
struct TradeoffAudit {
    double lambda_w = 0.0;              // sum_i c_i lambda_win^i
    std::vector<double> lambda_z;       // sum_i c_i lambda_z^i per constraint
    double offset = 0.0;                // C_{lambda_w, lambda_z}
    double c_m = 0.0;                   // endpoint coefficient
};

TradeoffAudit audit_certificate(const DualCertificate& cert);

/// Builds f from the certificate. `eta_z` overrides the certificate's
/// zero-probability tolerance in the penalty term.
MinTradeoff build_min_tradeoff(const DualCertificate& cert, std::optional<double> eta_z = std::nullopt);

struct CertificateEvaluation {
    double value = 0.0;
    std::vector<std::string> warnings;
};

/// f(nu) for nu in [1 - w_Q, w_Q]; outside that range throws DomainError.
/// Warns when nu is further than w_tol from the certified point.
CertificateEvaluation evaluate_certificate(const DualCertificate& cert, double nu,
                                           std::optional<double> eta_z = std::nullopt);

/// Crossover min-tradeoff function for spot-checking with testing ratio
/// gamma. Outcomes: 0 (lose), 1 (win), and no-test, whose value is
/// f_perp = lambda nu' + c_lambda.
struct CrossoverTradeoff {
    MinTradeoff base;
    double gamma = 1.0;
    double nu_prime = 0.0;
    double f_perp = 0.0;

    /// f_gamma(delta_c) for a test outcome c in {0, 1}.
    double on_test(int c) const;
    double on_no_test() const { return f_perp; }

    /// f_gamma(q') for q'(no-test) = 1 - gamma, q'(c) = gamma q(c), where
    /// q(1) = win_frequency.
    double on_mixed(double win_frequency) const;
};

CrossoverTradeoff crossover(const MinTradeoff& f, double gamma, double nu_prime);

struct TradeoffProperties {
    double max_f = 0.0;
    double min_sigma = 0.0;
    double var_sigma = 0.0;
    double nu0 = 0.0;
    double d = 0.0;
};

/// Max, Min over feasible distributions, and maximal variance of the
/// crossover function, with winning frequencies confined to [1 - w_q, w_q].
TradeoffProperties properties(const CrossoverTradeoff& cf, double w_q = kQuantumBound);

}  // namespace dire
