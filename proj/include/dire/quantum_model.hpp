#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dire {

inline constexpr double kClassicalBound = 0.75;
inline const double kQuantumBound = (2.0 + std::numbers::sqrt2) / 4.0;

/// One input/output tuple (a, b, x, y) of the two-party game.
struct Event {
    int a = 0;
    int b = 0;
    int x = 0;
    int y = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

/// CHSH game with an input distribution and the win predicate. The default
/// predicate wins when x*y XOR a XOR b == 1.
struct GameSpec {
    using WinFn = int (*)(int x, int y, int a, int b);

    std::array<double, 4> input_dist{0.25, 0.25, 0.25, 0.25};  // index 2x + y
    WinFn win_fn = nullptr;

    double input(int x, int y) const { return input_dist[2 * x + y]; }
    int wins(int x, int y, int a, int b) const { return win_fn(x, y, a, b); }

    /// Throws InvariantError if the distribution is not normalized.
    void validate() const;
};

int chsh_win(int x, int y, int a, int b);
GameSpec chsh_game();

enum class ClassLabel { chsh, c1, c2a, c2b, c2b_swap, c2c, c3a, c3b };

/// A zero-probability constraint class: the set of events whose probability
/// is forced to zero, in canonical order.
struct ZeroClass {
    ClassLabel label = ClassLabel::chsh;
    std::vector<Event> constraint_set;

    std::size_t n_zero() const { return constraint_set.size(); }
    std::string name() const;

    static ZeroClass of(ClassLabel label);
    /// Accepts the lowercase labels chsh, 1, 2a, 2b, 2b_swap, 2c, 3a, 3b.
    static ZeroClass parse(std::string_view label);
};

std::vector<ZeroClass> all_zero_classes();

enum class StateFamily {
    psi1,          // cos(phi)(cos(theta)|01> + sin(theta)|10>) + sin(phi)|11>
    psi2,          // cos(theta)|01> + sin(theta)|10>
    psi3,          // sin(phi)(cos(alpha)|01> - sin(alpha)|11>) + cos(phi)|10>
    psi2_rotated,  // psi2 with Bob's qubit rotated by exp(-i phi sigma_y)
};

/// Two-qubit state plus the binary observables
///   A_0 = B_0 = sigma_z,
///   A_1 = cos(2 alpha) sigma_z - sin(2 alpha) sigma_x,
///   B_1 = cos(2 beta)  sigma_z - sin(2 beta)  sigma_x.
/// With `swap_parties` the roles (a, x) and (b, y) are exchanged.
struct Strategy {
    double theta = 0.0;
    double phi = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    StateFamily family = StateFamily::psi2;
    bool swap_parties = false;
};

/// Conditional distribution P(a, b | x, y), stored (a, b, x, y) row-major.
class Behavior {
public:
    static constexpr double kTolerance = 1e-12;

    /// Validates range, normalization and no-signaling; throws InvariantError.
    explicit Behavior(const std::array<double, 16>& p);

    static constexpr std::size_t index(int a, int b, int x, int y) {
        return static_cast<std::size_t>(8 * a + 4 * b + 2 * x + y);
    }

    double operator()(int a, int b, int x, int y) const { return p_[index(a, b, x, y)]; }
    double operator()(const Event& e) const { return (*this)(e.a, e.b, e.x, e.y); }
    const std::array<double, 16>& values() const { return p_; }

    static Behavior uniform();

private:
    std::array<double, 16> p_;
};

void to_json(nlohmann::json& j, const Behavior& b);
Behavior behavior_from_json(const nlohmann::json& j);

/// Honest strategy maximizing the CHSH score within the class. Parameters
/// quoted to four digits are refined to a stationary point of the score.
Strategy strategy_for_class(const ZeroClass& zero_class);

/// Born-rule evaluation of the strategy.
Behavior correlation(const Strategy& s);

double winning_probability(const Behavior& b, const GameSpec& game = chsh_game());

std::vector<double> zero_violations(const Behavior& b, const ZeroClass& zero_class);

}  // namespace dire
