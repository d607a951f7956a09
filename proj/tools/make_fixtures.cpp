// Writes the synthetic certificates shipped in fixtures/. They stand in for
// solver output: per-term duals are spread evenly so that the aggregated
// slope and zero-probability weights hit chosen values, and the primal terms
// are set so that f at the certified point sits just below the target rate.

#include <fstream>
#include <iostream>
#include <numeric>
#include <string>

#include "dire/geat.hpp"
#include "dire/quadrature.hpp"
#include "dire/tradeoff.hpp"

namespace {

struct FixtureSpec {
    std::string file;
    std::string zero_class;
    dire::RandType rand_type;
    double rate;
    double lambda;
};

constexpr int kTerms = 12;
constexpr double kWTol = 2e-5;
constexpr double kEta = 1e-10;
constexpr double kLambdaZ = 2.0;
constexpr double kGap = 5e-7;

dire::DualCertificate make(const FixtureSpec& spec) {
    dire::DualCertificate c;
    c.zero_class = dire::ZeroClass::parse(spec.zero_class);
    c.rand_type = spec.rand_type;
    c.w_exp = dire::ProtocolParams::defaults(c.zero_class, c.rand_type).w_exp;
    c.w_tol = kWTol;
    c.eta_z = kEta;
    c.quadrature = dire::gauss_radau(kTerms);
    const auto coeff = dire::bff_coefficients(c.quadrature);
    const double sum_c = std::accumulate(coeff.c.begin(), coeff.c.end() - 1, 0.0);
    const double c_m = coeff.c.back();
    const std::size_t n_zero = c.zero_class.n_zero();

    c.lambda_win_terms.assign(kTerms - 1, spec.lambda / sum_c);
    c.lambda_z_terms.assign(kTerms - 1, std::vector<double>(n_zero, kLambdaZ / sum_c));
    c.gamma_win_star = c.w_exp;
    c.gamma_z_star.assign(n_zero, 0.0);
    const double target = spec.rate - kGap;
    const double xi = (target + spec.lambda * kWTol - c_m + kLambdaZ * kEta * static_cast<double>(n_zero)) / sum_c;
    c.primal_terms.assign(kTerms - 1, xi);
    c.asymptotic_rate = spec.rate;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "fixtures";
    const FixtureSpec specs[] = {
        {"chsh_local.json", "chsh", dire::RandType::local, 0.9981, 10.0},
        {"2a_local.json", "2a", dire::RandType::local, 0.9992, 16.0},
        {"2a_global.json", "2a", dire::RandType::global, 1.7964, 28.0},
        {"3b_blind.json", "3b", dire::RandType::blind, 0.9238, 27.0},
    };
    for (const auto& s : specs) {
        const std::string path = dir + "/" + s.file;
        std::ofstream out(path);
        out << dire::certificate_to_json(make(s)).dump(2) << "\n";
        if (!out) {
            std::cerr << "cannot write " << path << "\n";
            return 1;
        }
        std::cout << path << "\n";
    }
    return 0;
}
