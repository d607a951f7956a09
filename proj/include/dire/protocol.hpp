#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dire/geat.hpp"
#include "dire/quantum_model.hpp"

namespace dire {

/// Round-level knobs the protocol leaves open.
struct SimulationOptions {
    int x_star = 0;
    int y_star = 0;
    GameSpec game = chsh_game();
};

struct Verdict {
    bool pass = true;
    std::string failed_check;  // empty on pass

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Marker for "not recorded" (B on generation rounds for chi != blind) and
/// for the no-test symbol in C_w and C_z.
inline constexpr std::int8_t kUnset = -1;

struct Transcript {
    ProtocolParams params;
    SimulationOptions options;
    std::uint64_t seed = 0;

    std::vector<std::uint8_t> t, x, y, a;
    std::vector<std::int8_t> b;
    std::vector<std::int8_t> c_win;
    std::vector<std::vector<std::int8_t>> c_zero;  // [constraint][round]

    std::uint64_t tests = 0;
    std::uint64_t wins = 0;
    std::vector<std::uint64_t> zero_hits;
    Verdict verdict;

    std::uint64_t rounds() const { return t.size(); }

    /// Recounts tests/wins/zero hits from the arrays; true if they agree.
    bool counts_consistent() const;
};

/// Runs Protocol rounds against an honest strategy. Deterministic in `seed`.
/// `params.gamma` may be 0 here (every round is a generation round).
Transcript run_protocol(const Strategy& s, const ProtocolParams& params, std::uint64_t seed,
                        const SimulationOptions& options = {});

/// Score and zero-probability checks against gamma * n (not the realized
/// number of test rounds). Names the first failing check.
Verdict check_abort(std::uint64_t wins, const std::vector<std::uint64_t>& zero_hits, const ProtocolParams& params);
Verdict check_abort(const Transcript& t, const ProtocolParams& params);

/// Counts only; same sampling as `run_protocol` for the same seed.
struct RunSummary {
    std::uint64_t tests = 0;
    std::uint64_t wins = 0;
    std::vector<std::uint64_t> zero_hits;
    Verdict verdict;
};

RunSummary run_protocol_counts(const Strategy& s, const ProtocolParams& params, std::uint64_t seed,
                               const SimulationOptions& options = {});

struct CompletenessEstimate {
    std::uint64_t trials = 0;
    std::uint64_t aborts = 0;
    double win_rate = 0.0;               // pooled over test rounds
    std::vector<double> zero_hit_rates;  // pooled over test rounds
    double abort_fraction() const { return trials ? static_cast<double>(aborts) / trials : 0.0; }
};

/// Independent trials seeded with derive_seed(seed, k), run concurrently.
CompletenessEstimate estimate_completeness(const Strategy& s, const ProtocolParams& params, std::uint64_t trials,
                                           std::uint64_t seed, const SimulationOptions& options = {});

double empirical_completeness(const Strategy& s, const ProtocolParams& params, std::uint64_t trials,
                              std::uint64_t seed, const SimulationOptions& options = {});

/// Binary export: "DIRT", u32 version, u32 header length, JSON header
/// (params, seed, x*, y*), then 2 bits per round (A, B) packed LSB first;
/// B is written as 0 where it was not recorded. T, X and Y are replayed
/// from the seed when reading.
std::vector<std::uint8_t> encode_transcript(const Transcript& t);
Transcript decode_transcript(const std::vector<std::uint8_t>& bytes);

/// One row per round: i,T,X,Y,A,B,C_w,C_z... with '-' for unset entries.
void write_transcript_csv(std::ostream& out, const Transcript& t);

}  // namespace dire
