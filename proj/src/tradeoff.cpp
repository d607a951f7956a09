#include "dire/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dire/errors.hpp"

namespace dire {

namespace {

// Re-labels quadrature invariant failures as fields of the certificate.
template <typename F>
void in_quadrature(F&& f) {
    try {
        f();
    } catch (const InvariantError& e) {
        const std::string what = e.what();
        throw InvariantError("quadrature." + e.field(), what.substr(e.field().size() + 2));
    }
}

using nlohmann::json;

constexpr double kFeasibilitySlack = 1e-6;
constexpr double kQuadratureAuditTolerance = 1e-10;

const json& field(const json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("certificate: missing field '") + key + "'");
    return j.at(key);
}

double number(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number()) throw SchemaError(std::string("certificate: field '") + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& key) {
    if (!v.is_array()) throw SchemaError("certificate: field '" + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) throw SchemaError("certificate: field '" + key + "' has a non-numeric entry");
        out.push_back(x.get<double>());
    }
    return out;
}

std::string string_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw SchemaError(std::string("certificate: field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

std::string to_string(RandType t) {
    switch (t) {
        case RandType::local: return "local";
        case RandType::global: return "global";
        case RandType::blind: return "blind";
    }
    return {};
}

RandType parse_rand_type(std::string_view s) {
    if (s == "local" || s == "0") return RandType::local;
    if (s == "global" || s == "1") return RandType::global;
    if (s == "blind" || s == "2") return RandType::blind;
    throw InvariantError("rand_type", "unknown randomness type '" + std::string(s) + "'");
}

void DualCertificate::validate() const {
    const std::size_t terms = static_cast<std::size_t>(quadrature.m) - 1;
    const std::size_t n_zero = zero_class.n_zero();

    if (!(w_exp >= kClassicalBound && w_exp <= kQuantumBound + 1e-12))
        throw InvariantError("w_exp", "must lie in [0.75, (2+sqrt2)/4]");
    if (!(w_tol > 0.0 && w_tol < 1.0)) throw InvariantError("w_tol", "must lie in (0, 1)");
    if (!(eta_z > 0.0 && eta_z < 1.0)) throw InvariantError("eta_z", "must lie in (0, 1)");
    if (!(asymptotic_rate >= 0.0 && asymptotic_rate <= 2.0))
        throw InvariantError("asymptotic_rate", "must lie in [0, 2]");

    in_quadrature([&] { quadrature.validate(); });
    const Quadrature reference = gauss_radau(quadrature.m, quadrature.endpoint);
    for (int i = 0; i < quadrature.m; ++i) {
        if (std::abs(reference.nodes[i] - quadrature.nodes[i]) > kQuadratureAuditTolerance ||
            std::abs(reference.weights[i] - quadrature.weights[i]) > kQuadratureAuditTolerance)
            throw InvariantError("quadrature", "nodes/weights differ from the Radau rule for this m and endpoint");
    }

    if (lambda_win_terms.size() != terms)
        throw InvariantError("lambda_win_terms", "expected m-1 = " + std::to_string(terms) + " entries");
    if (primal_terms.size() != terms)
        throw InvariantError("primal_terms", "expected m-1 = " + std::to_string(terms) + " entries");
    if (lambda_z_terms.size() != terms)
        throw InvariantError("lambda_z_terms", "expected m-1 = " + std::to_string(terms) + " rows");
    for (const auto& row : lambda_z_terms)
        if (row.size() != n_zero)
            throw InvariantError("lambda_z_terms", "each row needs n_zero = " + std::to_string(n_zero) + " entries");
    if (gamma_z_star.size() != n_zero)
        throw InvariantError("gamma_z_star", "expected n_zero = " + std::to_string(n_zero) + " entries");
    if (!(gamma_win_star >= 0.0 && gamma_win_star <= 1.0))
        throw InvariantError("gamma_win_star", "must be a probability");
    for (double g : gamma_z_star)
        if (!(g >= 0.0 && g <= 1.0)) throw InvariantError("gamma_z_star", "entries must be probabilities");

    const TradeoffAudit audit = audit_certificate(*this);
    if (!(audit.lambda_w >= 0.0)) throw InvariantError("lambda_win_terms", "aggregated slope must be nonnegative");

    const MinTradeoff f = build_min_tradeoff(*this);
    const double margin = asymptotic_rate - f(certified_nu());
    if (margin < -kFeasibilitySlack)
        throw InvariantError("asymptotic_rate", "dual bound exceeds the primal rate at the certified point");
}

TradeoffAudit audit_certificate(const DualCertificate& cert) {
    const BffCoefficients coeff = bff_coefficients(cert.quadrature);
    const std::size_t terms = cert.lambda_win_terms.size();
    const std::size_t n_zero = cert.zero_class.n_zero();

    TradeoffAudit a;
    a.c_m = coeff.c.back();
    a.lambda_z.assign(n_zero, 0.0);
    double primal = 0.0;
    for (std::size_t i = 0; i < terms; ++i) {
        a.lambda_w += coeff.c[i] * cert.lambda_win_terms[i];
        for (std::size_t j = 0; j < n_zero; ++j) a.lambda_z[j] += coeff.c[i] * cert.lambda_z_terms[i][j];
        primal += coeff.c[i] * cert.primal_terms[i];
    }
    double z_dot = 0.0;
    for (std::size_t j = 0; j < n_zero; ++j) z_dot += a.lambda_z[j] * cert.gamma_z_star[j];
    a.offset = -a.lambda_w * cert.gamma_win_star + z_dot + a.c_m + primal;
    return a;
}

MinTradeoff build_min_tradeoff(const DualCertificate& cert, std::optional<double> eta_z) {
    const TradeoffAudit a = audit_certificate(cert);
    const double eta = eta_z.value_or(cert.eta_z);
    double penalty = 0.0;
    for (double lz : a.lambda_z) penalty += lz * eta;
    return MinTradeoff{a.lambda_w, a.offset - penalty};
}

CertificateEvaluation evaluate_certificate(const DualCertificate& cert, double nu, std::optional<double> eta_z) {
    if (!(nu >= 1.0 - kQuantumBound && nu <= kQuantumBound))
        throw DomainError("certificate evaluated outside nu in [1 - w_Q, w_Q]");
    CertificateEvaluation out;
    out.value = build_min_tradeoff(cert, eta_z)(nu);
    if (std::abs(nu - cert.certified_nu()) > cert.w_tol) {
        std::ostringstream msg;
        msg.precision(8);
        msg << "nu = " << nu << " differs from the certified point " << cert.certified_nu() << " by more than w_tol";
        out.warnings.push_back(msg.str());
    }
    return out;
}

DualCertificate load_certificate(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("certificate: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains(kCertificateKey))
        throw SchemaError(std::string("certificate: missing top-level key '") + kCertificateKey + "'");
    const json& j = doc.at(kCertificateKey);
    if (!j.is_object()) throw SchemaError("certificate: body must be an object");

    DualCertificate c;
    c.zero_class = ZeroClass::parse(string_field(j, "class"));
    c.rand_type = parse_rand_type(string_field(j, "rand_type"));
    if (j.contains("n_zero")) {
        const auto& nz = j.at("n_zero");
        if (!nz.is_number_integer()) throw SchemaError("certificate: field 'n_zero' must be an integer");
        if (nz.get<long long>() != static_cast<long long>(c.zero_class.n_zero()))
            throw InvariantError("n_zero", "class " + c.zero_class.name() + " has " +
                                               std::to_string(c.zero_class.n_zero()) + " zero constraints");
    }
    c.w_exp = number(j, "w_exp");
    c.w_tol = number(j, "w_tol");
    c.eta_z = number(j, "eta_z");
    in_quadrature([&] { c.quadrature = quadrature_from_json(field(j, "quadrature")); });
    c.lambda_win_terms = numbers(field(j, "lambda_win_terms"), "lambda_win_terms");
    const json& lz = field(j, "lambda_z_terms");
    if (!lz.is_array()) throw SchemaError("certificate: field 'lambda_z_terms' must be an array of arrays");
    for (const auto& row : lz) c.lambda_z_terms.push_back(numbers(row, "lambda_z_terms"));
    c.primal_terms = numbers(field(j, "primal_terms"), "primal_terms");
    c.gamma_win_star = number(j, "gamma_win_star");
    c.gamma_z_star = numbers(field(j, "gamma_z_star"), "gamma_z_star");
    c.asymptotic_rate = number(j, "asymptotic_rate");
    c.validate();
    return c;
}

DualCertificate load_certificate_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("certificate: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_certificate(ss.str());
}

json certificate_to_json(const DualCertificate& c) {
    json body = {
        {"class", c.zero_class.name()},
        {"rand_type", to_string(c.rand_type)},
        {"n_zero", c.zero_class.n_zero()},
        {"w_exp", c.w_exp},
        {"w_tol", c.w_tol},
        {"eta_z", c.eta_z},
        {"quadrature", c.quadrature},
        {"lambda_win_terms", c.lambda_win_terms},
        {"lambda_z_terms", c.lambda_z_terms},
        {"primal_terms", c.primal_terms},
        {"gamma_win_star", c.gamma_win_star},
        {"gamma_z_star", c.gamma_z_star},
        {"asymptotic_rate", c.asymptotic_rate},
    };
    return json{{kCertificateKey, body}};
}

double CrossoverTradeoff::on_test(int c) const {
    return base(c == 1 ? 1.0 : 0.0) / gamma + (1.0 - 1.0 / gamma) * f_perp;
}

double CrossoverTradeoff::on_mixed(double win_frequency) const {
    return (1.0 - gamma) * f_perp + gamma * (win_frequency * on_test(1) + (1.0 - win_frequency) * on_test(0));
}

CrossoverTradeoff crossover(const MinTradeoff& f, double gamma, double nu_prime) {
    if (!(gamma > 0.0)) throw InvariantError("gamma", "testing ratio must be positive");
    if (gamma > 1.0) throw InvariantError("gamma", "testing ratio must not exceed 1");
    if (!(nu_prime >= 0.0 && nu_prime <= 1.0)) throw InvariantError("nu_prime", "must lie in [0, 1]");
    return CrossoverTradeoff{f, gamma, nu_prime, f(nu_prime)};
}

TradeoffProperties properties(const CrossoverTradeoff& cf, double w_q) {
    const double lambda = cf.base.lambda;
    const double c = cf.base.c_lambda;
    const double g = cf.gamma;
    const double np = cf.nu_prime;

    TradeoffProperties p;
    p.max_f = (1.0 - 1.0 / g) * lambda * np + lambda / g + c;
    p.min_sigma = (1.0 - w_q) * lambda + c;
    p.nu0 = 1.0 / (2.0 * g) + (1.0 - 1.0 / g) * np;
    p.d = lambda * lambda / (4.0 * g * g) + (1.0 / g) * (1.0 - 1.0 / g) * lambda * lambda * (1.0 - np) * np;
    const double nearest = std::clamp(p.nu0, 1.0 - w_q, w_q);
    const double gap = nearest - p.nu0;
    p.var_sigma = std::max(0.0, p.d - lambda * lambda * gap * gap);
    return p;
}

}  // namespace dire
