#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace netflow {

enum ExitStatus : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitTolerance = 2,
    kExitMalformed = 3,
};

struct RunConfig {
    std::string command;  // validate | simulate | absorb | resolvent | approx | check

    std::string graph;
    std::string state;
    std::string absorption;
    std::vector<std::string> test_functions;
    /// Artifacts go here; `check` only writes a report when it is set.
    std::optional<std::string> out_dir;

    std::string t = "1";
    /// "re" or "re,im"
    std::string lambda = "1";
    std::optional<double> tol;
    int grid = 64;
    int order = 8;
    int quad_steps = 256;
    /// JSON-lines run log has log_steps + 1 entries at t k / log_steps.
    int log_steps = 4;
    /// "a..b" or "a,b,c"; empty selects the default schedule.
    std::string levels;
    std::string method = "cf";
    std::string mode = "auto";  // unit | general | auto

    std::string suite = "all";
    std::uint64_t seed = 7;
    std::string fixture_dir;
};

/// Executes one command. Human-readable progress goes to `out`, diagnostics to
/// `err`. Returns 0 ok, 1 validation failure, 2 numeric tolerance failure,
/// 3 malformed input.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses "re" or "re,im"; each part is an integer, p/q or decimal.
std::pair<double, double> parse_lambda(const std::string& text);

/// "a..b" (inclusive) or a comma list.
std::vector<int> parse_levels(const std::string& text);

}  // namespace netflow
