#pragma once

#include <vector>

#include <json.hpp>

namespace dire {

/// Gauss-Radau rule on (0, endpoint] with the right endpoint as fixed node.
struct Quadrature {
    int m = 0;
    double endpoint = 1.0;
    std::vector<double> nodes;    // strictly increasing, nodes.back() == endpoint
    std::vector<double> weights;  // all positive, sum to endpoint

    /// Checks shape, ordering, positivity, weight sum and polynomial exactness
    /// up to degree 2m-2. Throws InvariantError naming the failing field.
    void validate() const;
};

/// c_i = w_i / (t_i ln 2), c0 = sum of c_i.
struct BffCoefficients {
    std::vector<double> c;
    double c0 = 0.0;
};

/// Radau rule with `m` nodes on [0, endpoint]. Requires m >= 2 and
/// endpoint in (0, 1].
Quadrature gauss_radau(int m, double endpoint = 1.0);

BffCoefficients bff_coefficients(const Quadrature& q);

void to_json(nlohmann::json& j, const Quadrature& q);
Quadrature quadrature_from_json(const nlohmann::json& j);

}  // namespace dire
