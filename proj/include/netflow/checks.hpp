#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace netflow {

struct CheckResult {
    std::string suite;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Suite names accepted by run_checks.
const std::vector<std::string>& check_suites();

/// Runs the randomized invariant checks of one suite ("all" runs every suite).
/// Deterministic for a fixed seed. The fixtures suite re-validates every
/// graph, state, test function and absorption file in `fixture_dir`.
std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed, const std::string& fixture_dir);

}  // namespace netflow
