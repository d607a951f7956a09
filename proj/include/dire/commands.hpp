#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dire {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;

inline constexpr const char* kCliJsonSchema = "dire_cli_v1";
inline constexpr const char* kSimulateCsvSchema = "simulate_v1";

/// Grid syntax: "log:lo:hi:count", "lin:lo:hi:count" or a comma-separated
/// list of values.
std::vector<double> parse_grid(const std::string& spec, const std::string& field);

/// Parses a round count such as "100000" or "1e7".
std::uint64_t parse_count(const std::string& text, const std::string& field);

/// Entry point for the `dire` executable. Subcommands: certify, rate,
/// simulate, extract. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dire
