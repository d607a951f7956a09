#include "dire/quantum_model.hpp"

#include <algorithm>
#include <complex>
#include <functional>

#include "dire/errors.hpp"

namespace dire {

namespace {

using cplx = std::complex<double>;
using Vec4 = std::array<cplx, 4>;
using Mat2 = std::array<std::array<cplx, 2>, 2>;

constexpr double kPi = std::numbers::pi;

Mat2 observable(int setting, double angle) {
    if (setting == 0) return Mat2{{{1.0, 0.0}, {0.0, -1.0}}};
    const double c = std::cos(2.0 * angle);
    const double s = std::sin(2.0 * angle);
    return Mat2{{{c, -s}, {-s, -c}}};
}

// (1 + (-1)^outcome O) / 2
Mat2 projector(const Mat2& o, int outcome) {
    const double sign = outcome == 0 ? 1.0 : -1.0;
    Mat2 m{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m[i][j] = 0.5 * ((i == j ? 1.0 : 0.0) + sign * o[i][j]);
    return m;
}

// Basis order |00>, |01>, |10>, |11> with Alice's qubit first.
Vec4 state_vector(const Strategy& s) {
    const double ct = std::cos(s.theta), st = std::sin(s.theta);
    const double cp = std::cos(s.phi), sp = std::sin(s.phi);
    switch (s.family) {
        case StateFamily::psi1:
            return {0.0, cp * ct, cp * st, sp};
        case StateFamily::psi2:
            return {0.0, ct, st, 0.0};
        case StateFamily::psi3:
            return {0.0, sp * std::cos(s.alpha), cp, -sp * std::sin(s.alpha)};
        case StateFamily::psi2_rotated:
            // R = [[cos, -sin], [sin, cos]] acting on Bob.
            return {-ct * sp, ct * cp, st * cp, st * sp};
    }
    return {};
}

double born(const Vec4& psi, const Mat2& m, const Mat2& n) {
    cplx acc = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    acc += std::conj(psi[2 * i + j]) * m[i][k] * n[j][l] * psi[2 * k + l];
    return acc.real();
}

double score(const Strategy& s) { return winning_probability(correlation(s)); }

// Newton ascent on a smooth objective of one or two variables with
// central-difference derivatives. Stops when the step falls below 1e-13.
std::vector<double> maximize(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x) {
    const std::size_t d = x.size();
    const double hg = 1e-6;
    const double hh = 1e-4;
    auto shifted = [&](std::vector<double> v, std::size_t i, double di, std::size_t j, double dj) {
        v[i] += di;
        v[j] += dj;
        return f(v);
    };
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> g(d);
        std::vector<std::vector<double>> h(d, std::vector<double>(d));
        for (std::size_t i = 0; i < d; ++i) {
            g[i] = (shifted(x, i, hg, i, 0.0) - shifted(x, i, -hg, i, 0.0)) / (2 * hg);
            for (std::size_t j = 0; j < d; ++j) {
                if (i == j) {
                    h[i][i] = (shifted(x, i, hh, i, 0.0) - 2 * f(x) + shifted(x, i, -hh, i, 0.0)) / (hh * hh);
                } else {
                    h[i][j] = (shifted(x, i, hh, j, hh) - shifted(x, i, hh, j, -hh) -
                               shifted(x, i, -hh, j, hh) + shifted(x, i, -hh, j, -hh)) /
                              (4 * hh * hh);
                }
            }
        }
        std::vector<double> step(d);
        if (d == 1) {
            step[0] = -g[0] / h[0][0];
        } else {
            const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            step[0] = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
            step[1] = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        }
        // Backtrack if the Newton step does not ascend.
        const double f0 = f(x);
        double scale = 1.0;
        std::vector<double> trial(d);
        for (int k = 0; k < 30; ++k) {
            for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] + scale * step[i];
            if (f(trial) >= f0 - 1e-15) break;
            scale *= 0.5;
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < d; ++i) norm = std::max(norm, std::abs(trial[i] - x[i]));
        x = trial;
        if (norm < 1e-13) break;
    }
    return x;
}

Strategy class1(const std::vector<double>& v) {
    return {kPi / 4, v[0], v[1], v[1], StateFamily::psi1, false};
}

Strategy class2c(const std::vector<double>& v) {
    const double theta = v[0], alpha = v[1];
    const double beta = kPi / 2 - alpha;
    const double phi = std::atan(std::sin(theta) / std::tan(beta) - std::tan(alpha) * std::cos(theta));
    return {theta, phi, alpha, beta, StateFamily::psi1, false};
}

Strategy class3b(const std::vector<double>& v) {
    const double alpha = v[0];
    return {std::atan(std::tan(alpha) * std::tan(alpha)), 0.0, alpha, alpha, StateFamily::psi2, false};
}

}  // namespace

int chsh_win(int x, int y, int a, int b) { return ((x * y) ^ a ^ b) == 1 ? 1 : 0; }

GameSpec chsh_game() {
    GameSpec g;
    g.win_fn = &chsh_win;
    return g;
}

void GameSpec::validate() const {
    double total = 0.0;
    for (double p : input_dist) {
        if (!(p >= 0.0)) throw InvariantError("input_dist", "entries must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvariantError("input_dist", "entries must sum to 1");
    if (win_fn == nullptr) throw InvariantError("win_fn", "missing win predicate");
}

std::string ZeroClass::name() const {
    switch (label) {
        case ClassLabel::chsh: return "chsh";
        case ClassLabel::c1: return "1";
        case ClassLabel::c2a: return "2a";
        case ClassLabel::c2b: return "2b";
        case ClassLabel::c2b_swap: return "2b_swap";
        case ClassLabel::c2c: return "2c";
        case ClassLabel::c3a: return "3a";
        case ClassLabel::c3b: return "3b";
    }
    return {};
}

ZeroClass ZeroClass::of(ClassLabel label) {
    ZeroClass z;
    z.label = label;
    const Event p0000{0, 0, 0, 0};
    switch (label) {
        case ClassLabel::chsh: break;
        case ClassLabel::c1: z.constraint_set = {p0000}; break;
        case ClassLabel::c2a: z.constraint_set = {p0000, {1, 1, 0, 0}}; break;
        case ClassLabel::c2b: z.constraint_set = {p0000, {1, 1, 1, 0}}; break;
        case ClassLabel::c2b_swap: z.constraint_set = {p0000, {1, 1, 0, 1}}; break;
        case ClassLabel::c2c: z.constraint_set = {p0000, {1, 0, 1, 1}}; break;
        case ClassLabel::c3a: z.constraint_set = {p0000, {1, 1, 1, 0}, {1, 1, 0, 1}}; break;
        case ClassLabel::c3b: z.constraint_set = {p0000, {1, 1, 0, 0}, {1, 0, 1, 1}}; break;
    }
    return z;
}

ZeroClass ZeroClass::parse(std::string_view label) {
    for (const auto& z : all_zero_classes())
        if (z.name() == label) return z;
    throw InvariantError("class", "unsupported class '" + std::string(label) + "'");
}

std::vector<ZeroClass> all_zero_classes() {
    std::vector<ZeroClass> out;
    for (auto l : {ClassLabel::chsh, ClassLabel::c1, ClassLabel::c2a, ClassLabel::c2b, ClassLabel::c2b_swap,
                   ClassLabel::c2c, ClassLabel::c3a, ClassLabel::c3b})
        out.push_back(ZeroClass::of(l));
    return out;
}

Behavior::Behavior(const std::array<double, 16>& p) : p_(p) {
    for (double v : p_)
        if (!(v >= 0.0 && v <= 1.0)) throw InvariantError("p", "entries must lie in [0, 1]");
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double total = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) total += (*this)(a, b, x, y);
            if (std::abs(total - 1.0) > kTolerance)
                throw InvariantError("p", "P(.,.|x,y) must sum to 1");
        }
    for (int a = 0; a < 2; ++a)
        for (int x = 0; x < 2; ++x) {
            const double m0 = (*this)(a, 0, x, 0) + (*this)(a, 1, x, 0);
            const double m1 = (*this)(a, 0, x, 1) + (*this)(a, 1, x, 1);
            if (std::abs(m0 - m1) > kTolerance) throw InvariantError("p", "Alice's marginal depends on y");
        }
    for (int b = 0; b < 2; ++b)
        for (int y = 0; y < 2; ++y) {
            const double m0 = (*this)(0, b, 0, y) + (*this)(1, b, 0, y);
            const double m1 = (*this)(0, b, 1, y) + (*this)(1, b, 1, y);
            if (std::abs(m0 - m1) > kTolerance) throw InvariantError("p", "Bob's marginal depends on x");
        }
}

Behavior Behavior::uniform() {
    std::array<double, 16> p;
    p.fill(0.25);
    return Behavior(p);
}

void to_json(nlohmann::json& j, const Behavior& b) {
    j = nlohmann::json{{"p", b.values()}};
}

Behavior behavior_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("p") || !j.at("p").is_array() || j.at("p").size() != 16)
        throw SchemaError("behavior: expected {\"p\": [16 numbers]}");
    std::array<double, 16> p{};
    for (std::size_t i = 0; i < 16; ++i) {
        if (!j.at("p")[i].is_number()) throw SchemaError("behavior: p entries must be numbers");
        p[i] = j.at("p")[i].get<double>();
    }
    return Behavior(p);
}

Strategy strategy_for_class(const ZeroClass& zero_class) {
    switch (zero_class.label) {
        case ClassLabel::chsh:
            return {kPi / 4, kPi / 8, -kPi / 4, -kPi / 4, StateFamily::psi2_rotated, false};
        case ClassLabel::c1: {
            auto f = [](const std::vector<double>& v) { return score(class1(v)); };
            return class1(maximize(f, {0.2275, -0.6403}));
        }
        case ClassLabel::c2a:
            return {kPi / 4, 0.0, -5 * kPi / 6, kPi / 6, StateFamily::psi2, false};
        case ClassLabel::c2b:
            return {0.0, kPi / 4, kPi / 6, kPi / 4, StateFamily::psi3, false};
        case ClassLabel::c2b_swap: {
            Strategy s = strategy_for_class(ZeroClass::of(ClassLabel::c2b));
            s.swap_parties = true;
            return s;
        }
        case ClassLabel::c2c: {
            auto f = [](const std::vector<double>& v) { return score(class2c(v)); };
            return class2c(maximize(f, {0.5815, 0.8068}));
        }
        case ClassLabel::c3a: {
            // Closed form.
            const double alpha = 0.5 * std::atan(-2.0 * std::sqrt(2.0 + std::sqrt(5.0)));
            const double phi = std::atan(std::tan(alpha) / std::sin(alpha));
            return {0.0, phi, alpha, alpha, StateFamily::psi3, false};
        }
        case ClassLabel::c3b: {
            auto f = [](const std::vector<double>& v) { return score(class3b(v)); };
            return class3b(maximize(f, {0.6354}));
        }
    }
    throw InvariantError("class", "unsupported class");
}

Behavior correlation(const Strategy& s) {
    const Vec4 psi = state_vector(s);
    std::array<double, 16> p{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) {
                    const double v = born(psi, projector(observable(x, s.alpha), a),
                                          projector(observable(y, s.beta), b));
                    const auto idx = s.swap_parties ? Behavior::index(b, a, y, x) : Behavior::index(a, b, x, y);
                    p[idx] = std::clamp(v, 0.0, 1.0);
                }
    return Behavior(p);
}

double winning_probability(const Behavior& b, const GameSpec& game) {
    double w = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double inner = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c) inner += game.wins(x, y, a, c) * b(a, c, x, y);
            w += game.input(x, y) * inner;
        }
    return w;
}

std::vector<double> zero_violations(const Behavior& b, const ZeroClass& zero_class) {
    std::vector<double> out;
    out.reserve(zero_class.n_zero());
    for (const auto& e : zero_class.constraint_set) out.push_back(b(e));
    return out;
}

}  // namespace dire
