#include "netflow/cli.hpp"
#include "netflow/version.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_inputs(CLI::App* cmd, netflow::RunConfig& c, bool state = true) {
    cmd->add_option("--graph", c.graph, "graph file")->required();
    if (state) cmd->add_option("--state", c.state, "state file")->required();
}

void add_out(CLI::App* cmd, netflow::RunConfig& c) {
    cmd->add_option("--out", c.out_dir, "output directory for artifacts");
}

}  // namespace

int main(int argc, char** argv) {
    netflow::RunConfig c;
    CLI::App app{"Transport flows on metric graphs"};
    app.set_version_flag("--version", netflow::kVersion);
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "check column stochasticity and structure of a graph");
    add_inputs(validate, c, false);
    add_out(validate, c);

    auto* simulate = app.add_subcommand("simulate", "exact transport semigroup T(t) f");
    add_inputs(simulate, c);
    simulate->add_option("--t", c.t, "time as p/q (decimals are rejected)")->capture_default_str();
    simulate->add_option("--grid", c.grid, "samples M on [0,1]")->capture_default_str();
    simulate->add_option("--log-steps", c.log_steps, "run-log entries after t = 0")->capture_default_str();
    add_out(simulate, c);

    auto* absorb = app.add_subcommand("absorb", "Dyson-Phillips series for transport with absorption");
    add_inputs(absorb, c);
    absorb->add_option("--absorption", c.absorption, "absorption rate file")->required();
    absorb->add_option("--t", c.t, "time as p/q")->capture_default_str();
    absorb->add_option("--order", c.order, "series order K")->capture_default_str();
    absorb->add_option("--quad-steps", c.quad_steps, "quadrature panels N")->capture_default_str();
    absorb->add_option("--grid", c.grid, "samples M on [0,1]")->capture_default_str();
    absorb->add_option("--log-steps", c.log_steps, "run-log entries after t = 0")->capture_default_str();
    absorb->add_option("--tol", c.tol, "fail with exit 2 when the error bound exceeds this");
    add_out(absorb, c);

    auto* resolvent = app.add_subcommand("resolvent", "resolvent R(lambda, A) f");
    add_inputs(resolvent, c);
    resolvent->add_option("--lambda", c.lambda, "re[,im] with Re > 0")->capture_default_str();
    resolvent->add_option("--tol", c.tol, "series truncation tolerance (default 1e-12)");
    resolvent->add_option("--grid", c.grid, "samples M on [0,1]")->capture_default_str();
    resolvent->add_option("--mode", c.mode, "unit, general or auto")
        ->check(CLI::IsMember({"unit", "general", "auto"}))
        ->capture_default_str();
    add_out(resolvent, c);

    auto* approx = app.add_subcommand("approx", "rational approximation of the velocities and convergence table");
    add_inputs(approx, c);
    approx->add_option("--t", c.t, "time as p/q")->capture_default_str();
    approx->add_option("--lambda", c.lambda, "re[,im] with Re > 0")->capture_default_str();
    approx->add_option("--levels", c.levels, "a..b or a,b,c (default: 3..8 for cf, 1..3 for dec)");
    approx->add_option("--method", c.method, "cf or dec")->check(CLI::IsMember({"cf", "dec"}))->capture_default_str();
    approx->add_option("--testfn", c.test_functions, "test function files (default: 1 on each edge)");
    approx->add_option("--grid", c.grid, "resolvent samples M")->capture_default_str();
    approx->add_option("--tol", c.tol, "fail with exit 2 when the last resolvent error exceeds this");
    add_out(approx, c);

    auto* check = app.add_subcommand("check", "randomized invariant suite and fixture re-validation");
    check->add_option("--suite", c.suite, "all, fixtures, semigroup, resolvent, absorption or approximation")
        ->capture_default_str();
    check->add_option("--seed", c.seed, "random seed")->capture_default_str();
    c.fixture_dir = NETFLOW_DEFAULT_FIXTURES;
    check->add_option("--fixtures", c.fixture_dir, "fixture directory")->capture_default_str();
    add_out(check, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : netflow::kExitMalformed;
    }
    c.command = app.get_subcommands().front()->get_name();
    return netflow::run(c, std::cout, std::cerr);
}
