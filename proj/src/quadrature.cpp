#include "dire/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "dire/errors.hpp"

namespace dire {

namespace {

constexpr double kExactnessTolerance = 1e-10;

double require_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw SchemaError(std::string("quadrature: missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

std::vector<double> require_numbers(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw SchemaError(std::string("quadrature: missing array field '") + key + "'");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw SchemaError(std::string("quadrature: non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

Quadrature gauss_radau(int m, double endpoint) {
    if (m < 2) throw InvariantError("m", "Radau rule needs at least 2 nodes");
    if (!(endpoint > 0.0 && endpoint <= 1.0)) throw InvariantError("endpoint", "must lie in (0, 1]");

    // Monic shifted Legendre recurrence on [0, L]:
    //   a_k = L/2,  b_k = (L/2)^2 k^2 / (4k^2 - 1).
    const double half = endpoint / 2.0;
    auto b = [half](int k) {
        const double kk = static_cast<double>(k) * k;
        return half * half * kk / (4.0 * kk - 1.0);
    };

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) jac(k, k) = half;
    for (int k = 1; k < m; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(b(k));

    // Fix the last node at the endpoint: solve (J_{m-1} - L I) d = b_{m-1} e_{m-1}
    // and replace the last diagonal entry by L + d_{m-1}.
    const int n = m - 1;
    Eigen::MatrixXd lead = jac.topLeftCorner(n, n) - endpoint * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = b(n);
    const Eigen::VectorXd d = lead.partialPivLu().solve(rhs);
    jac(m - 1, m - 1) = endpoint + d(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
    if (eig.info() != Eigen::Success) throw DomainError("gauss_radau: eigen-decomposition failed");

    Quadrature q;
    q.m = m;
    q.endpoint = endpoint;
    q.nodes.resize(m);
    q.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        q.nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        q.weights[i] = endpoint * v0 * v0;
    }
    q.nodes.back() = endpoint;
    q.validate();
    return q;
}

void Quadrature::validate() const {
    if (m < 2) throw InvariantError("m", "Radau rule needs at least 2 nodes");
    if (!(endpoint > 0.0 && endpoint <= 1.0)) throw InvariantError("endpoint", "must lie in (0, 1]");
    if (nodes.size() != static_cast<std::size_t>(m) || weights.size() != static_cast<std::size_t>(m))
        throw InvariantError("nodes", "node and weight counts must equal m");
    for (int i = 0; i < m; ++i) {
        if (!(nodes[i] > 0.0 && nodes[i] <= endpoint)) throw InvariantError("nodes", "node outside (0, endpoint]");
        if (i > 0 && !(nodes[i] > nodes[i - 1])) throw InvariantError("nodes", "nodes must be strictly increasing");
        if (!(weights[i] > 0.0)) throw InvariantError("weights", "weights must be positive");
    }
    if (nodes.back() != endpoint) throw InvariantError("nodes", "last node must equal the endpoint");
    for (int k = 0; k <= 2 * m - 2; ++k) {
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += weights[i] * std::pow(nodes[i], k);
        const double exact = std::pow(endpoint, k + 1) / (k + 1);
        if (std::abs(sum - exact) > kExactnessTolerance)
            throw InvariantError("weights", "rule is not exact for t^" + std::to_string(k));
    }
}

BffCoefficients bff_coefficients(const Quadrature& q) {
    BffCoefficients out;
    out.c.reserve(q.nodes.size());
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        out.c.push_back(q.weights[i] / (q.nodes[i] * std::numbers::ln2));
        out.c0 += out.c.back();
    }
    return out;
}

void to_json(nlohmann::json& j, const Quadrature& q) {
    j = nlohmann::json{{"m", q.m}, {"endpoint", q.endpoint}, {"nodes", q.nodes}, {"weights", q.weights}};
}

Quadrature quadrature_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("quadrature: expected an object");
    if (!j.contains("m") || !j.at("m").is_number_integer()) throw SchemaError("quadrature: missing integer field 'm'");
    Quadrature q;
    q.m = j.at("m").get<int>();
    q.endpoint = require_number(j, "endpoint");
    q.nodes = require_numbers(j, "nodes");
    q.weights = require_numbers(j, "weights");
    q.validate();
    return q;
}

}  // namespace dire
