#include "dire/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dire/errors.hpp"
#include "dire/extractor.hpp"
#include "dire/geat.hpp"
#include "dire/protocol.hpp"
#include "dire/rng.hpp"
#include "dire/tradeoff.hpp"

namespace dire {

namespace {

using nlohmann::json;

double parse_real(const std::string& text, const std::string& field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::logic_error&) {
        throw InvariantError(field, "not a number: '" + text + "'");
    }
}

// Writes to the named file, or to `fallback` when the path is empty or "-".
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty() || path == "-") return;
        file_.open(path, std::ios::binary);
        if (!file_) throw InvariantError("out", "cannot open '" + path + "' for writing");
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

struct CommonFlags {
    std::string zero_class;
    std::string rand_type;
    std::optional<double> w_exp;
    double w_tol = 1e-4;
    double eta_z = 1e-3;
    std::optional<double> eta_z_prime;
    double epsilon = 1e-12;
    double epsilon_ext = 1e-15;
    std::string out;
    bool json = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--class", f.zero_class, "Zero-probability class: chsh, 1, 2a, 2b, 2b_swap, 2c, 3a, 3b");
    cmd->add_option("--rand-type", f.rand_type, "Randomness type: local, global, blind (or 0, 1, 2)");
    cmd->add_option("--w-exp", f.w_exp, "Expected winning probability");
    cmd->add_option("--w-tol", f.w_tol, "Score tolerance")->capture_default_str();
    cmd->add_option("--eta-z", f.eta_z, "Zero-probability tolerance")->capture_default_str();
    cmd->add_option("--eta-z-prime", f.eta_z_prime, "Honest zero-probability margin (default eta_z / 2)");
    cmd->add_option("--epsilon", f.epsilon, "Smoothing parameter")->capture_default_str();
    cmd->add_option("--epsilon-ext", f.epsilon_ext, "Extractor error")->capture_default_str();
    cmd->add_option("--out", f.out, "Output file (default stdout)");
    cmd->add_flag("--json", f.json, "Machine-readable JSON output");
    cmd->add_option("--config", "Flat key=value configuration file; command-line flags take precedence");
}

void apply_common(ProtocolParams& p, const CommonFlags& f) {
    if (f.w_exp) p.w_exp = *f.w_exp;
    p.w_tol = f.w_tol;
    p.eta_z = f.eta_z;
    p.eta_z_prime = f.eta_z_prime.value_or(f.eta_z / 2.0);
    p.epsilon = f.epsilon;
    p.epsilon_ext = f.epsilon_ext;
}

json breakdown_to_json(const RateBreakdown& r) {
    return json{{"n", r.n},
                {"gamma", r.gamma},
                {"beta", r.beta},
                {"nu_prime", r.nu_prime},
                {"h", r.h},
                {"delta", r.delta},
                {"delta_inp", r.delta_inp},
                {"delta_ext", r.delta_ext},
                {"raw_rate", r.raw_rate},
                {"rate", r.rate},
                {"smooth_min_entropy_total", r.smooth_min_entropy_total},
                {"epsilon_c", r.epsilon_c},
                {"epsilon_s", r.epsilon_s}};
}

std::string fixed4(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
}

// certify

struct CertifyFlags {
    std::string cert;
    std::optional<double> nu;
    std::optional<double> eta_z;
    bool json = false;
};

int cmd_certify(const CertifyFlags& f, std::ostream& out, std::ostream& err) {
    const DualCertificate cert = load_certificate_file(f.cert);
    const TradeoffAudit audit = audit_certificate(cert);
    const MinTradeoff fn = build_min_tradeoff(cert, f.eta_z);
    const double nu = f.nu.value_or(cert.certified_nu());
    const auto eval = evaluate_certificate(cert, nu, f.eta_z);
    const double margin = cert.asymptotic_rate - build_min_tradeoff(cert)(cert.certified_nu());
    for (const auto& w : eval.warnings) err << "warning: " << w << "\n";

    if (f.json) {
        out << json{{"schema", kCliJsonSchema},
                    {"command", "certify"},
                    {"class", cert.zero_class.name()},
                    {"rand_type", to_string(cert.rand_type)},
                    {"m", cert.quadrature.m},
                    {"lambda_w", audit.lambda_w},
                    {"lambda_z", audit.lambda_z},
                    {"offset", audit.offset},
                    {"c_m", audit.c_m},
                    {"lambda", fn.lambda},
                    {"c_lambda", fn.c_lambda},
                    {"nu", nu},
                    {"f_nu", eval.value},
                    {"asymptotic_rate", cert.asymptotic_rate},
                    {"feasibility_margin", margin}}
                   .dump(2)
            << "\n";
        return kExitOk;
    }
    out << std::setprecision(10);
    out << "certificate: class " << cert.zero_class.name() << ", " << to_string(cert.rand_type)
        << " randomness, m = " << cert.quadrature.m << ", endpoint " << cert.quadrature.endpoint << "\n";
    out << "lambda_w = " << audit.lambda_w << "\n";
    out << "lambda_z =";
    for (double v : audit.lambda_z) out << " " << v;
    out << (audit.lambda_z.empty() ? " (none)\n" : "\n");
    out << "C = " << audit.offset << ", c_m = " << audit.c_m << "\n";
    out << "f(nu) = " << fn.lambda << " * nu " << (fn.c_lambda < 0 ? "- " : "+ ") << std::abs(fn.c_lambda) << "\n";
    out << "nu = " << nu << ", f(nu) = " << eval.value << "\n";
    out << "dual-feasibility margin = " << margin << "\n";
    out << "OK, rate bound at ν: ≤ " << fixed4(eval.value) << "\n";
    return kExitOk;
}

// rate

struct RateFlags {
    CommonFlags common;
    std::string cert;
    std::vector<std::string> n = {"1e5", "1e6", "1e7", "1e8", "1e9", "1e10", "1e11", "1e12"};
    std::string gamma = "log:1e-4:1:25";
    std::string beta_grid = "log:1e-6:0.9:50";
    std::string nu_grid = "lin:0:1:21";
    std::string heatmap;
};

int cmd_rate(const RateFlags& f, std::ostream& out, std::ostream& err) {
    const DualCertificate cert = load_certificate_file(f.cert);
    ProtocolParams base = ProtocolParams::defaults(cert.zero_class, cert.rand_type);
    base.w_exp = cert.w_exp;
    if (!f.common.zero_class.empty()) base.zero_class = ZeroClass::parse(f.common.zero_class);
    if (!f.common.rand_type.empty()) {
        base.rand_type = parse_rand_type(f.common.rand_type);
        base.d_k = ProtocolParams::default_d_k(base.rand_type);
    }
    apply_common(base, f.common);

    ScanGrids grids;
    grids.gamma = parse_grid(f.gamma, "gamma");
    grids.beta = parse_grid(f.beta_grid, "beta_grid");
    grids.nu_prime = parse_grid(f.nu_grid, "nu_grid");
    std::vector<std::uint64_t> ns;
    for (const auto& s : f.n) ns.push_back(parse_count(s, "n"));
    for (std::uint64_t n : ns) {
        ProtocolParams p = base;
        p.n = n;
        p.gamma = grids.gamma.front();
        p.validate();
    }

    std::optional<Sink> heat;
    if (!f.heatmap.empty()) {
        heat.emplace(f.heatmap, out);
        write_rate_csv_header(heat->get());
    }
    std::vector<RateBreakdown> rows;
    std::set<std::string> warnings;
    for (std::uint64_t n : ns) {
        ProtocolParams p = base;
        p.n = n;
        const auto all = scan(cert, p, grids);
        if (heat)
            for (const auto& r : all) write_rate_csv_row(heat->get(), r);
        rows.push_back(optimize(cert, p, grids));
        warnings.insert(rows.back().warnings.begin(), rows.back().warnings.end());
    }
    for (const auto& w : warnings) err << "warning: " << w << "\n";

    Sink sink(f.common.out, out);
    if (f.common.json) {
        json j{{"schema", kCliJsonSchema}, {"command", "rate"}, {"params", params_to_json(base)}, {"rows", json::array()}};
        j["params"].erase("n");
        j["params"].erase("gamma");
        for (const auto& r : rows) j["rows"].push_back(breakdown_to_json(r));
        sink.get() << j.dump(2) << "\n";
    } else {
        write_rate_csv_header(sink.get());
        for (const auto& r : rows) write_rate_csv_row(sink.get(), r);
    }
    return kExitOk;
}

// simulate

struct SimulateFlags {
    CommonFlags common;
    std::string n = "1e5";
    double gamma = 1.0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    int x_star = 0;
    int y_star = 0;
    std::string transcript;
    std::string transcript_csv;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream&) {
    if (f.trials < 1) throw InvariantError("trials", "must be at least 1");
    const ZeroClass zc = ZeroClass::parse(f.common.zero_class.empty() ? "chsh" : f.common.zero_class);
    const RandType rt = f.common.rand_type.empty() ? RandType::local : parse_rand_type(f.common.rand_type);
    ProtocolParams p = ProtocolParams::defaults(zc, rt);
    apply_common(p, f.common);
    p.n = parse_count(f.n, "n");
    p.gamma = f.gamma;
    SimulationOptions options;
    options.x_star = f.x_star;
    options.y_star = f.y_star;

    const Strategy s = strategy_for_class(zc);
    const auto est = estimate_completeness(s, p, f.trials, f.seed, options);
    const double eps_c = completeness_bound(p.n, p.w_tol, p.eta_z_prime, zc.n_zero());

    if (!f.transcript.empty() || !f.transcript_csv.empty()) {
        const Transcript t = run_protocol(s, p, derive_seed(f.seed, 0), options);
        if (!f.transcript.empty()) write_file_bytes(f.transcript, encode_transcript(t));
        if (!f.transcript_csv.empty()) {
            Sink csv(f.transcript_csv, out);
            write_transcript_csv(csv.get(), t);
        }
    }

    Sink sink(f.common.out, out);
    auto& o = sink.get();
    if (f.common.json) {
        o << json{{"schema", kCliJsonSchema},
                  {"command", "simulate"},
                  {"params", params_to_json(p)},
                  {"trials", f.trials},
                  {"seed", f.seed},
                  {"win_rate", est.win_rate},
                  {"zero_hit_rates", est.zero_hit_rates},
                  {"aborts", est.aborts},
                  {"abort_fraction", est.abort_fraction()},
                  {"epsilon_c", eps_c}}
                 .dump(2)
          << "\n";
        return kExitOk;
    }
    o << "# schema: " << kSimulateCsvSchema << "\n";
    o << "class,rand_type,n,gamma,trials,seed,win_rate";
    for (std::size_t j = 0; j < zc.n_zero(); ++j) o << ",zero_hit_rate_" << j + 1;
    o << ",aborts,abort_fraction,epsilon_c\n";
    o << std::setprecision(17);
    o << zc.name() << ',' << to_string(rt) << ',' << p.n << ',' << p.gamma << ',' << f.trials << ',' << f.seed << ','
      << est.win_rate;
    for (double r : est.zero_hit_rates) o << ',' << r;
    o << ',' << est.aborts << ',' << est.abort_fraction() << ',' << eps_c << "\n";
    return kExitOk;
}

// extract

struct ExtractFlags {
    std::string input;
    std::string seed_bits;
    double k_ext = 0.0;
    double epsilon_ext = 1e-15;
    bool raw = false;
    std::string out;
    bool json = false;
};

BitString load_bits(const std::string& path, bool raw) {
    const auto bytes = read_file_bytes(path);
    return raw ? bits_from_raw(bytes) : decode_bitstream(bytes);
}

int cmd_extract(const ExtractFlags& f, std::ostream& out, std::ostream& err) {
    const BitString input = load_bits(f.input, f.raw);
    const BitString seed_bits = load_bits(f.seed_bits, f.raw);
    if (!(f.k_ext > 0.0)) throw InvariantError("k_ext", "must be positive");
    if (f.k_ext > static_cast<double>(input.size()))
        throw InvariantError("k_ext", "exceeds the input length of " + std::to_string(input.size()) + " bits");
    const double half = f.epsilon_ext / 2.0;
    const double loss = extractor_loss(half, half);
    const std::uint64_t l = output_length(f.k_ext, half, half);
    if (l == 0) {
        err << "nothing extractable: k_ext = " << f.k_ext << " <= extractor loss " << loss << "\n";
        return kExitInfeasible;
    }
    ExtractorSpec spec = ExtractorSpec::with_even_split(input.size(), l, f.epsilon_ext);
    spec.validate();
    if (seed_bits.size() < spec.seed_len())
        throw InvariantError("seed_bits", "need " + std::to_string(spec.seed_len()) + " seed bits, got " +
                                              std::to_string(seed_bits.size()));
    BitString seed(spec.seed_len());
    for (std::size_t i = 0; i < seed.size(); ++i) seed.set(i, seed_bits.get(i));

    const BitString result = extract(input, seed, spec);
    if (!f.out.empty()) write_file_bytes(f.out, encode_bitstream(result));
    if (f.json) {
        out << json{{"schema", kCliJsonSchema},
                    {"command", "extract"},
                    {"input_len", input.size()},
                    {"k_ext", f.k_ext},
                    {"extractor_loss", loss},
                    {"output_len", l},
                    {"seed_len", spec.seed_len()}}
                   .dump(2)
            << "\n";
    } else {
        out << std::setprecision(10) << "input bits: " << input.size() << "\n"
            << "extractor loss: " << loss << "\n"
            << "output length: " << l << "\n"
            << "seed bits used: " << spec.seed_len() << "\n";
        if (f.out.empty()) out << "output: " << result.to_string() << "\n";
    }
    return kExitOk;
}

// Reads a flat key=value file into flags. Blank lines and lines starting
// with '#' or ';' are skipped; underscores in keys become dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvariantError("config", "cannot read '" + path + "'");
    std::vector<std::pair<std::string, std::string>> items;
    std::string line;
    int number = 0;
    auto trim = [](std::string v) {
        const auto b = v.find_first_not_of(" \t\r"), e = v.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvariantError("config", path + ":" + std::to_string(number) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        items.emplace_back("--" + key, value);
    }
    return items;
}

// Replaces "--config FILE" after the subcommand with the file's flags.
// Flags given explicitly on the command line win over the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    const auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
    if (sub == args.end()) return args;
    std::string path;
    for (auto it = sub + 1; it != args.end(); ++it) {
        if (*it == "--config" && it + 1 != args.end()) {
            path = *(it + 1);
            args.erase(it, it + 2);
            break;
        }
        if (it->rfind("--config=", 0) == 0) {
            path = it->substr(9);
            args.erase(it);
            break;
        }
    }
    if (path.empty()) return args;
    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> extra;
    for (const auto& [flag, value] : read_config(path)) {
        if (given(flag)) continue;
        if (flag == "--json" || flag == "--raw") {
            if (value == "true" || value == "1") extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        extra.push_back(value);
    }
    const auto at = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
    args.insert(at + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec, const std::string& field) {
    std::vector<std::string> parts;
    const bool ranged = spec.rfind("log:", 0) == 0 || spec.rfind("lin:", 0) == 0;
    std::stringstream ss(ranged ? spec.substr(4) : spec);
    std::string item;
    while (std::getline(ss, item, ranged ? ':' : ',')) parts.push_back(item);
    if (parts.empty()) throw InvariantError(field, "empty grid");
    if (!ranged) {
        std::vector<double> v;
        for (const auto& p : parts) v.push_back(parse_real(p, field));
        return v;
    }
    if (parts.size() != 3) throw InvariantError(field, "expected kind:lo:hi:count");
    const double lo = parse_real(parts[0], field), hi = parse_real(parts[1], field);
    const double count = parse_real(parts[2], field);
    if (count < 1 || count != std::floor(count) || count > 1e6) throw InvariantError(field, "bad point count");
    if (lo > hi) throw InvariantError(field, "lo must not exceed hi");
    if (spec[1] == 'o') {
        if (!(lo > 0.0)) throw InvariantError(field, "log grid needs lo > 0");
        return log_grid(lo, hi, static_cast<int>(count));
    }
    return linear_grid(lo, hi, static_cast<int>(count));
}

std::uint64_t parse_count(const std::string& text, const std::string& field) {
    const double v = parse_real(text, field);
    if (!(v >= 1.0) || v != std::floor(v) || v > 9.0e18)
        throw InvariantError(field, "must be a positive integer, got '" + text + "'");
    return static_cast<std::uint64_t>(v);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Device-independent randomness expansion tools"};
    app.name("dire");
    app.require_subcommand(1);

    CertifyFlags certify;
    auto* c = app.add_subcommand("certify", "Audit a dual certificate and print its min-tradeoff function");
    c->add_option("--cert", certify.cert, "Certificate JSON")->required();
    c->add_option("--nu", certify.nu, "Evaluate f at this winning probability (default w_exp - w_tol)");
    c->add_option("--eta-z", certify.eta_z, "Zero-probability tolerance for the penalty term");
    c->add_flag("--json", certify.json, "Machine-readable JSON output");

    RateFlags rate;
    auto* r = app.add_subcommand("rate", "Optimize the finite-size rate over parameter grids");
    add_common(r, rate.common);
    r->add_option("--cert", rate.cert, "Certificate JSON")->required();
    r->add_option("--n", rate.n, "Round counts")->delimiter(',')->capture_default_str();
    r->add_option("--gamma", rate.gamma, "Testing-ratio grid")->capture_default_str();
    r->add_option("--beta-grid", rate.beta_grid, "Renyi-parameter grid")->capture_default_str();
    r->add_option("--nu-grid", rate.nu_grid, "nu' grid")->capture_default_str();
    r->add_option("--heatmap", rate.heatmap, "Also write every grid point to this CSV");

    SimulateFlags sim;
    auto* s = app.add_subcommand("simulate", "Run the protocol against the honest strategy");
    add_common(s, sim.common);
    s->add_option("--n", sim.n, "Rounds per trial")->capture_default_str();
    s->add_option("--gamma", sim.gamma, "Testing ratio")->capture_default_str();
    s->add_option("--trials", sim.trials, "Independent trials")->capture_default_str();
    s->add_option("--seed", sim.seed, "64-bit seed")->capture_default_str();
    s->add_option("--x-star", sim.x_star, "Alice's generation input")->capture_default_str();
    s->add_option("--y-star", sim.y_star, "Bob's generation input")->capture_default_str();
    s->add_option("--transcript", sim.transcript, "Binary transcript of trial 0");
    s->add_option("--transcript-csv", sim.transcript_csv, "CSV transcript of trial 0");

    ExtractFlags ex;
    auto* e = app.add_subcommand("extract", "Toeplitz-hash raw bits down to near-uniform output");
    e->add_option("--input", ex.input, "Input bit stream")->required();
    e->add_option("--seed-bits", ex.seed_bits, "Seed bit stream")->required();
    e->add_option("--k-ext", ex.k_ext, "Smooth min-entropy of the input in bits")->required();
    e->add_option("--epsilon-ext", ex.epsilon_ext, "Extractor error")->capture_default_str();
    e->add_flag("--raw", ex.raw, "Inputs are raw bytes without a length header");
    e->add_option("--out", ex.out, "Write the output bit stream here");
    e->add_flag("--json", ex.json, "Machine-readable JSON output");
    e->add_option("--config", "Flat key=value configuration file; command-line flags take precedence");

    try {
        const auto args = expand_config(std::vector<std::string>(argv, argv + argc));
        std::vector<const char*> expanded;
        for (const auto& a : args) expanded.push_back(a.c_str());
        app.parse(static_cast<int>(expanded.size()), expanded.data());
    } catch (const InvariantError& error) {
        err << "invalid " << error.what() << "\n";
        return kExitUsage;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& error) {
        err << "error: " << error.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*c) return cmd_certify(certify, out, err);
        if (*r) return cmd_rate(rate, out, err);
        if (*s) return cmd_simulate(sim, out, err);
        return cmd_extract(ex, out, err);
    } catch (const SchemaError& error) {
        err << "schema error: " << error.what() << "\n";
        return kExitUsage;
    } catch (const InvariantError& error) {
        err << "invalid " << error.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& error) {
        err << "infeasible: " << error.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& error) {
        err << "error: " << error.what() << "\n";
        return kExitUsage;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"dire"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dire
