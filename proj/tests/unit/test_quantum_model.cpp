#include <doctest.h>

#include <numbers>

#include "dire/errors.hpp"
#include "dire/quantum_model.hpp"
#include "support.hpp"

using namespace dire;

namespace {

constexpr double kPi = std::numbers::pi;

double honest_score(const std::string& label) {
    return winning_probability(correlation(strategy_for_class(ZeroClass::parse(label))));
}

}  // namespace

TEST_CASE("constraint sets per class") {
    auto set_of = [](const std::string& label) {
        std::vector<std::array<int, 4>> out;
        for (const auto& e : ZeroClass::parse(label).constraint_set) out.push_back({e.a, e.b, e.x, e.y});
        return out;
    };
    using V = std::vector<std::array<int, 4>>;
    CHECK(set_of("chsh").empty());
    CHECK(set_of("1") == V{{0, 0, 0, 0}});
    CHECK(set_of("2a") == V{{0, 0, 0, 0}, {1, 1, 0, 0}});
    CHECK(set_of("2b") == V{{0, 0, 0, 0}, {1, 1, 1, 0}});
    CHECK(set_of("2b_swap") == V{{0, 0, 0, 0}, {1, 1, 0, 1}});
    CHECK(set_of("2c") == V{{0, 0, 0, 0}, {1, 0, 1, 1}});
    CHECK(set_of("3a") == V{{0, 0, 0, 0}, {1, 1, 1, 0}, {1, 1, 0, 1}});
    CHECK(set_of("3b") == V{{0, 0, 0, 0}, {1, 1, 0, 0}, {1, 0, 1, 1}});
    for (const auto& zc : all_zero_classes()) {
        CHECK(zc.n_zero() == zc.constraint_set.size());
        CHECK(ZeroClass::parse(zc.name()).label == zc.label);
    }
    CHECK(all_zero_classes().size() == 8);
}

TEST_CASE("unknown class label is rejected") {
    try {
        ZeroClass::parse("4z");
        FAIL("expected rejection");
    } catch (const InvariantError& e) {
        CHECK(e.field() == "class");
        CHECK(std::string(e.what()).find("unsupported class") != std::string::npos);
    }
}

TEST_CASE("class 2a strategy parameters") {
    const Strategy s = strategy_for_class(ZeroClass::parse("2a"));
    CHECK(s.family == StateFamily::psi2);
    CHECK(s.theta == doctest::Approx(kPi / 4).epsilon(1e-12));
    CHECK(s.alpha == doctest::Approx(-5 * kPi / 6).epsilon(1e-12));
    CHECK(s.beta == doctest::Approx(kPi / 6).epsilon(1e-12));
}

TEST_CASE("class 3b strategy satisfies its extra condition") {
    const Strategy s = strategy_for_class(ZeroClass::parse("3b"));
    CHECK(s.family == StateFamily::psi2);
    CHECK(s.alpha == doctest::Approx(0.6354).epsilon(1e-3));
    CHECK(s.alpha == doctest::Approx(s.beta).epsilon(1e-12));
    CHECK(std::tan(s.theta) == doctest::Approx(std::tan(s.alpha) * std::tan(s.beta)).epsilon(1e-10));
}

TEST_CASE("class 2b_swap exchanges the parties of class 2b") {
    const Behavior plain = correlation(strategy_for_class(ZeroClass::parse("2b")));
    const Behavior swapped = correlation(strategy_for_class(ZeroClass::parse("2b_swap")));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) CHECK(swapped(a, b, x, y) == doctest::Approx(plain(b, a, y, x)));
}

TEST_CASE("honest scores") {
    CHECK(honest_score("chsh") == doctest::Approx(kQuantumBound).epsilon(1e-12));
    CHECK(std::abs(honest_score("1") - 0.8294) < 1e-3);
    CHECK(std::abs(honest_score("2a") - 0.8125) < 1e-6);
    CHECK(std::abs(honest_score("2b") - 0.8125) < 1e-6);
    CHECK(std::abs(honest_score("2b_swap") - 0.8125) < 1e-6);
    CHECK(std::abs(honest_score("2c") - 0.8039) < 1e-3);
    CHECK(std::abs(honest_score("3a") - 0.7951) < 1e-3);
    CHECK(std::abs(honest_score("3b") - 0.7837) < 1e-3);
    for (const auto& zc : all_zero_classes()) CHECK(honest_score(zc.name()) > kClassicalBound);
}

TEST_CASE("honest strategies respect their zero constraints") {
    for (const auto& zc : all_zero_classes()) {
        const auto v = zero_violations(correlation(strategy_for_class(zc)), zc);
        REQUIRE(v.size() == zc.n_zero());
        for (double p : v) CHECK(p <= 1e-9);
    }
    const auto z2a = zero_violations(correlation(strategy_for_class(ZeroClass::parse("2a"))), ZeroClass::parse("2a"));
    CHECK(z2a[0] <= 1e-12);
    CHECK(z2a[1] <= 1e-12);
}

TEST_CASE("zero_violations on simple behaviors") {
    CHECK(zero_violations(Behavior::uniform(), ZeroClass::parse("chsh")).empty());
    const auto v = zero_violations(Behavior::uniform(), ZeroClass::parse("1"));
    REQUIRE(v.size() == 1);
    CHECK(v[0] == 0.25);
}

TEST_CASE("uniform outputs win half the time") { CHECK(winning_probability(Behavior::uniform()) == 0.5); }

TEST_CASE("computational-basis product state") {
    Strategy s;
    s.family = StateFamily::psi2;
    s.theta = 0.0;
    s.alpha = 0.0;
    s.beta = 0.0;
    const Behavior b = correlation(s);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) CHECK(b(0, 1, x, y) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("deterministic local strategies stay at or below the classical bound") {
    for (int fa = 0; fa < 4; ++fa) {
        for (int fb = 0; fb < 4; ++fb) {
            std::array<double, 16> p{};
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) {
                    const int a = (fa >> x) & 1, b = (fb >> y) & 1;
                    p[Behavior::index(a, b, x, y)] = 1.0;
                }
            CHECK(winning_probability(Behavior(p)) <= kClassicalBound);
        }
    }
}

TEST_CASE("property: random strategies give valid behaviors") {
    testing::Gen gen(11);
    const StateFamily families[] = {StateFamily::psi1, StateFamily::psi2, StateFamily::psi3,
                                    StateFamily::psi2_rotated};
    for (int k = 0; k < 2000; ++k) {
        Strategy s;
        s.theta = gen.real(-kPi, kPi);
        s.phi = gen.real(-kPi, kPi);
        s.alpha = gen.real(-kPi, kPi);
        s.beta = gen.real(-kPi, kPi);
        s.family = families[gen.integer(0, 3)];
        s.swap_parties = gen.coin();
        const Behavior b = correlation(s);  // constructor enforces the invariants
        const double w = winning_probability(b);
        CHECK(w >= 0.0);
        CHECK(w <= kQuantumBound + 1e-12);
    }
}

TEST_CASE("behavior validation") {
    std::array<double, 16> p{};
    p.fill(0.25);
    p[0] = 0.3;
    CHECK_THROWS_AS(Behavior{p}, InvariantError);

    // normalized but signaling: Alice's marginal depends on y
    std::array<double, 16> s{};
    s[Behavior::index(0, 0, 0, 0)] = 1.0;
    s[Behavior::index(1, 0, 0, 1)] = 1.0;
    s[Behavior::index(0, 0, 1, 0)] = 1.0;
    s[Behavior::index(0, 0, 1, 1)] = 1.0;
    CHECK_THROWS_AS(Behavior{s}, InvariantError);

    std::array<double, 16> neg{};
    neg.fill(0.25);
    neg[0] = -0.25;
    neg[4] = 0.75;
    CHECK_THROWS_AS(Behavior{neg}, InvariantError);
}

TEST_CASE("behavior JSON round trip") {
    const Behavior b = correlation(strategy_for_class(ZeroClass::parse("3a")));
    nlohmann::json j = b;
    REQUIRE(j.at("p").size() == 16);
    const Behavior back = behavior_from_json(j);
    CHECK(back.values() == b.values());
    CHECK_THROWS(behavior_from_json(nlohmann::json{{"p", {1, 2}}}));
}

TEST_CASE("non-uniform input distribution must be normalized") {
    GameSpec g = chsh_game();
    g.input_dist = {0.5, 0.5, 0.5, 0.0};
    CHECK_THROWS_AS(g.validate(), InvariantError);
    g.input_dist = {1.0, 0.0, 0.0, 0.0};
    CHECK_NOTHROW(g.validate());
}
