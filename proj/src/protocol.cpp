#include "dire/protocol.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <ostream>
#include <thread>

#include "dire/errors.hpp"
#include "dire/rng.hpp"

namespace dire {

namespace {

constexpr std::uint32_t kTranscriptVersion = 1;

void validate_for_simulation(const ProtocolParams& p, const SimulationOptions& o) {
    if (p.n < 1) throw InvariantError("n", "must be at least 1");
    if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw InvariantError("gamma", "must lie in [0, 1]");
    if (!(p.w_tol >= 0.0 && p.w_tol <= 1.0)) throw InvariantError("w_tol", "must lie in [0, 1]");
    if (!(p.eta_z >= 0.0 && p.eta_z <= 1.0)) throw InvariantError("eta_z", "must lie in [0, 1]");
    if (o.x_star < 0 || o.x_star > 1 || o.y_star < 0 || o.y_star > 1)
        throw InvariantError("x_star", "generation inputs must be bits");
    o.game.validate();
}

// Index of the first cumulative entry exceeding u; falls back to the last
// entry with positive mass so that zero-probability outcomes never appear.
int pick(const std::array<double, 4>& cdf, const std::array<double, 4>& mass, double u) {
    for (int k = 0; k < 4; ++k)
        if (u < cdf[k] && mass[k] > 0.0) return k;
    for (int k = 3; k >= 0; --k)
        if (mass[k] > 0.0) return k;
    return 3;
}

struct RoundSampler {
    std::array<double, 4> input_mass{};
    std::array<double, 4> input_cdf{};
    std::array<std::array<double, 4>, 4> out_mass{};  // [2x+y][2a+b]
    std::array<std::array<double, 4>, 4> out_cdf{};
    double gamma = 0.0;
    int x_star = 0;
    int y_star = 0;

    RoundSampler(const ProtocolParams& p, const SimulationOptions& o, const Behavior* behavior)
        : gamma(p.gamma), x_star(o.x_star), y_star(o.y_star) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) {
            input_mass[k] = o.game.input_dist[k];
            acc += input_mass[k];
            input_cdf[k] = acc;
        }
        if (behavior == nullptr) return;
        for (int xy = 0; xy < 4; ++xy) {
            double c = 0.0;
            for (int ab = 0; ab < 4; ++ab) {
                out_mass[xy][ab] = (*behavior)(ab >> 1, ab & 1, xy >> 1, xy & 1);
                c += out_mass[xy][ab];
                out_cdf[xy][ab] = c;
            }
        }
    }

    // Draw order per round: T, inputs, outputs (inputs are drawn even on
    // generation rounds so each quantity has a fixed draw position).
    struct Inputs {
        bool test;
        int x;
        int y;
    };

    Inputs inputs(RoundStream& rs) const {
        const bool test = rs.uniform() < gamma;
        const double u = rs.uniform();
        if (!test) return {false, x_star, y_star};
        const int xy = pick(input_cdf, input_mass, u);
        return {true, xy >> 1, xy & 1};
    }

    int outputs(RoundStream& rs, int x, int y) const {
        const int xy = 2 * x + y;
        return pick(out_cdf[xy], out_mass[xy], rs.uniform());
    }
};

template <typename Visit>
void simulate(const Strategy& s, const ProtocolParams& params, std::uint64_t seed, const SimulationOptions& options,
              Visit&& visit) {
    validate_for_simulation(params, options);
    const Behavior behavior = correlation(s);
    const RoundSampler sampler(params, options, &behavior);
    for (std::uint64_t i = 0; i < params.n; ++i) {
        RoundStream rs(seed, i);
        const auto in = sampler.inputs(rs);
        const int ab = sampler.outputs(rs, in.x, in.y);
        visit(i, in.test, in.x, in.y, ab >> 1, ab & 1);
    }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in[at + k]) << (8 * k);
    return v;
}

// Fills C_w, C_z and the counters from T, X, Y, A, B.
void derive_checks(Transcript& t) {
    const auto& constraints = t.params.zero_class.constraint_set;
    const std::uint64_t n = t.rounds();
    t.c_win.assign(n, kUnset);
    t.c_zero.assign(constraints.size(), std::vector<std::int8_t>(n, kUnset));
    t.zero_hits.assign(constraints.size(), 0);
    t.tests = t.wins = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!t.t[i]) continue;
        ++t.tests;
        const int x = t.x[i], y = t.y[i], a = t.a[i], b = t.b[i];
        t.c_win[i] = static_cast<std::int8_t>(t.options.game.wins(x, y, a, b));
        t.wins += t.c_win[i];
        for (std::size_t j = 0; j < constraints.size(); ++j) {
            const Event e = constraints[j];
            const bool hit = e.a == a && e.b == b && e.x == x && e.y == y;
            t.c_zero[j][i] = hit ? 1 : 0;
            t.zero_hits[j] += hit;
        }
    }
}

}  // namespace

bool Transcript::counts_consistent() const {
    std::uint64_t n_tests = 0, n_wins = 0;
    std::vector<std::uint64_t> hits(c_zero.size(), 0);
    for (std::uint64_t i = 0; i < rounds(); ++i) {
        if ((c_win[i] == kUnset) != (t[i] == 0)) return false;
        n_tests += t[i];
        if (c_win[i] == 1) ++n_wins;
        for (std::size_t j = 0; j < c_zero.size(); ++j)
            if (c_zero[j][i] == 1) ++hits[j];
    }
    return n_tests == tests && n_wins == wins && hits == zero_hits;
}

Transcript run_protocol(const Strategy& s, const ProtocolParams& params, std::uint64_t seed,
                        const SimulationOptions& options) {
    Transcript t;
    t.params = params;
    t.options = options;
    t.seed = seed;
    t.t.resize(params.n);
    t.x.resize(params.n);
    t.y.resize(params.n);
    t.a.resize(params.n);
    t.b.resize(params.n);
    const bool always_b = params.rand_type == RandType::blind;
    simulate(s, params, seed, options, [&](std::uint64_t i, bool test, int x, int y, int a, int b) {
        t.t[i] = test;
        t.x[i] = static_cast<std::uint8_t>(x);
        t.y[i] = static_cast<std::uint8_t>(y);
        t.a[i] = static_cast<std::uint8_t>(a);
        t.b[i] = (test || always_b) ? static_cast<std::int8_t>(b) : kUnset;
    });
    derive_checks(t);
    t.verdict = check_abort(t, params);
    return t;
}

Verdict check_abort(std::uint64_t wins, const std::vector<std::uint64_t>& zero_hits, const ProtocolParams& params) {
    const double tested = params.gamma * static_cast<double>(params.n);
    const double win_threshold = (params.w_exp - params.w_tol) * tested;
    if (static_cast<double>(wins) < win_threshold)
        return {false, "score: " + std::to_string(wins) + " wins < threshold " + std::to_string(win_threshold)};
    const double zero_threshold = params.eta_z * tested;
    const auto& constraints = params.zero_class.constraint_set;
    for (std::size_t j = 0; j < zero_hits.size() && j < constraints.size(); ++j) {
        if (static_cast<double>(zero_hits[j]) > zero_threshold) {
            const Event e = constraints[j];
            return {false, "zero constraint P(" + std::to_string(e.a) + "," + std::to_string(e.b) + "|" +
                               std::to_string(e.x) + "," + std::to_string(e.y) + "): " +
                               std::to_string(zero_hits[j]) + " hits > threshold " + std::to_string(zero_threshold)};
        }
    }
    return {};
}

Verdict check_abort(const Transcript& t, const ProtocolParams& params) {
    return check_abort(t.wins, t.zero_hits, params);
}

RunSummary run_protocol_counts(const Strategy& s, const ProtocolParams& params, std::uint64_t seed,
                               const SimulationOptions& options) {
    RunSummary r;
    const auto& constraints = params.zero_class.constraint_set;
    r.zero_hits.assign(constraints.size(), 0);
    simulate(s, params, seed, options, [&](std::uint64_t, bool test, int x, int y, int a, int b) {
        if (!test) return;
        ++r.tests;
        r.wins += options.game.wins(x, y, a, b);
        for (std::size_t j = 0; j < constraints.size(); ++j) {
            const Event e = constraints[j];
            r.zero_hits[j] += e.a == a && e.b == b && e.x == x && e.y == y;
        }
    });
    r.verdict = check_abort(r.wins, r.zero_hits, params);
    return r;
}

CompletenessEstimate estimate_completeness(const Strategy& s, const ProtocolParams& params, std::uint64_t trials,
                                           std::uint64_t seed, const SimulationOptions& options) {
    if (trials < 1) throw InvariantError("trials", "must be at least 1");
    validate_for_simulation(params, options);
    std::vector<RunSummary> runs(trials);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t k = begin; k < end; ++k)
            runs[k] = run_protocol_counts(s, params, derive_seed(seed, k), options);
    };
    const std::uint64_t workers = std::clamp<std::uint64_t>(std::thread::hardware_concurrency(), 1, 16);
    if (workers == 1 || trials < 2) {
        work(0, trials);
    } else {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (trials + workers - 1) / workers;
        for (std::uint64_t begin = 0; begin < trials; begin += chunk)
            pool.emplace_back(work, begin, std::min(trials, begin + chunk));
    }

    CompletenessEstimate est;
    est.trials = trials;
    std::uint64_t tests = 0, wins = 0;
    std::vector<std::uint64_t> hits(params.zero_class.n_zero(), 0);
    for (const auto& r : runs) {
        est.aborts += r.verdict.pass ? 0 : 1;
        tests += r.tests;
        wins += r.wins;
        for (std::size_t j = 0; j < hits.size(); ++j) hits[j] += r.zero_hits[j];
    }
    const double denom = tests > 0 ? static_cast<double>(tests) : 1.0;
    est.win_rate = tests > 0 ? static_cast<double>(wins) / denom : 0.0;
    for (auto h : hits) est.zero_hit_rates.push_back(static_cast<double>(h) / denom);
    return est;
}

double empirical_completeness(const Strategy& s, const ProtocolParams& params, std::uint64_t trials,
                              std::uint64_t seed, const SimulationOptions& options) {
    return estimate_completeness(s, params, trials, seed, options).abort_fraction();
}

std::vector<std::uint8_t> encode_transcript(const Transcript& t) {
    nlohmann::json header = {{"params", params_to_json(t.params)},
                             {"seed", t.seed},
                             {"x_star", t.options.x_star},
                             {"y_star", t.options.y_star},
                             {"input_dist", t.options.game.input_dist}};
    const std::string text = header.dump();
    std::vector<std::uint8_t> out = {'D', 'I', 'R', 'T'};
    put_u32(out, kTranscriptVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    const std::size_t base = out.size();
    out.resize(base + (2 * t.rounds() + 7) / 8, 0);
    for (std::uint64_t i = 0; i < t.rounds(); ++i) {
        const unsigned bits = static_cast<unsigned>(t.a[i]) | (t.b[i] == 1 ? 2u : 0u);
        const std::uint64_t pos = 2 * i;
        out[base + pos / 8] |= static_cast<std::uint8_t>(bits << (pos % 8));
    }
    return out;
}

Transcript decode_transcript(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "DIRT", 4) != 0)
        throw SchemaError("transcript: bad magic");
    if (get_u32(bytes, 4) != kTranscriptVersion) throw SchemaError("transcript: unsupported version");
    const std::uint32_t len = get_u32(bytes, 8);
    if (bytes.size() < 12 + static_cast<std::size_t>(len)) throw SchemaError("transcript: truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + len);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("transcript: bad header: ") + e.what());
    }

    Transcript t;
    t.params = params_from_json(header.at("params"));
    t.seed = header.at("seed").get<std::uint64_t>();
    t.options.x_star = header.at("x_star").get<int>();
    t.options.y_star = header.at("y_star").get<int>();
    t.options.game.input_dist = header.at("input_dist").get<std::array<double, 4>>();
    validate_for_simulation(t.params, t.options);

    const std::uint64_t n = t.params.n;
    const std::size_t base = 12 + len;
    if (bytes.size() - base != (2 * n + 7) / 8) throw SchemaError("transcript: payload does not match n");

    const RoundSampler sampler(t.params, t.options, nullptr);
    const bool always_b = t.params.rand_type == RandType::blind;
    t.t.resize(n);
    t.x.resize(n);
    t.y.resize(n);
    t.a.resize(n);
    t.b.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        RoundStream rs(t.seed, i);
        const auto in = sampler.inputs(rs);
        const std::uint64_t pos = 2 * i;
        const unsigned bits = (bytes[base + pos / 8] >> (pos % 8)) & 3u;
        t.t[i] = in.test;
        t.x[i] = static_cast<std::uint8_t>(in.x);
        t.y[i] = static_cast<std::uint8_t>(in.y);
        t.a[i] = static_cast<std::uint8_t>(bits & 1u);
        t.b[i] = (in.test || always_b) ? static_cast<std::int8_t>(bits >> 1) : kUnset;
    }
    derive_checks(t);
    t.verdict = check_abort(t, t.params);
    return t;
}

void write_transcript_csv(std::ostream& out, const Transcript& t) {
    out << "# schema: transcript_v1 seed=" << t.seed << " n=" << t.rounds() << " class=" << t.params.zero_class.name()
        << " rand_type=" << to_string(t.params.rand_type) << " gamma=" << t.params.gamma << "\n";
    out << "i,T,X,Y,A,B,C_w";
    for (const auto& e : t.params.zero_class.constraint_set)
        out << ",C_z(" << e.a << e.b << "|" << e.x << e.y << ")";
    out << "\n";
    auto cell = [](std::int8_t v) { return v == kUnset ? std::string("-") : std::to_string(v); };
    for (std::uint64_t i = 0; i < t.rounds(); ++i) {
        out << i << ',' << int(t.t[i]) << ',' << int(t.x[i]) << ',' << int(t.y[i]) << ',' << int(t.a[i]) << ','
            << cell(t.b[i]) << ',' << cell(t.c_win[i]);
        for (const auto& col : t.c_zero) out << ',' << cell(col[i]);
        out << "\n";
    }
}

}  // namespace dire
