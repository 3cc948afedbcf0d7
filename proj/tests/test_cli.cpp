#include "oracles.hpp"
#include "support.hpp"

#include "netflow/cli.hpp"
#include "netflow/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace netflow;
using namespace testing_support;

namespace {

namespace fs = std::filesystem;

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("netflow_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string file(const std::string& name, const std::string& text) const {
        const auto p = (dir / name).string();
        write_text_file(p, text);
        return p;
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run_quiet(const RunConfig& c, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run(c, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

RunConfig simulate_g2(const std::string& out_dir) {
    RunConfig c;
    c.command = "simulate";
    c.graph = fixture("g2.graph");
    c.state = fixture("unit_e1.state");
    c.t = "1/2";
    c.out_dir = out_dir;
    return c;
}

}  // namespace

TEST_CASE("validate reports column sums of the shipped fixture") {
    RunConfig c;
    c.command = "validate";
    c.graph = fixture("g2.graph");
    std::string out;
    CHECK(run_quiet(c, &out) == kExitOk);
    CHECK(out.find("2 columns, all sum 1") != std::string::npos);
}

TEST_CASE("validate exit codes for defective graphs") {
    Scratch s("validate");
    RunConfig c;
    c.command = "validate";
    c.graph = s.file("bad_sum.graph", "graph bad\nedge 1 a b\nedge 2 b a\nw 2 1 1/2\nw 1 2 1\n");
    CHECK(run_quiet(c) == kExitValidation);
    c.graph = s.file("garbage.graph", "graph bad\nedge 1 a\n");
    std::string err;
    CHECK(run_quiet(c, nullptr, &err) == kExitMalformed);
    CHECK(err.find("garbage.graph") != std::string::npos);
    c.graph = s.path("missing.graph");
    CHECK(run_quiet(c) == kExitMalformed);
}

TEST_CASE("simulate writes the evolved state as CSV, state file, metadata and run log") {
    Scratch s("simulate");
    REQUIRE(run_quiet(simulate_g2(s.dir.string())) == kExitOk);
    // unit mass on e1 moves onto e2 over [1/2, 1) after half a time unit
    auto csv = parse_csv(read_text_file(s.path("simulate.csv")));
    REQUIRE(csv.grid == 64);
    auto g = load_graph("g2.graph");
    oracles::CharacteristicTracer tracer(*g, {{1, Rational(1)}, {2, Rational(1)}});
    auto f = read_state_file(fixture("unit_e1.state"));
    for (int m = 0; m < 64; ++m)
        for (EdgeId j : {1, 2})
            CHECK(csv.samples[m].at(j) == to_double(tracer.value(f, j, ratio(m, 64), q("1/2"))));
    auto state = read_state_file(s.path("simulate.state"));
    CHECK(state == NetworkState({q("0"), q("1/2"), q("1")}, {vec({{1, "1"}}), vec({{2, "1"}})}));

    const auto log = read_text_file(s.path("simulate.log.jsonl"));
    CHECK(std::count(log.begin(), log.end(), '\n') == 5);
    CHECK(log.find("\"boundary_residual\"") != std::string::npos);
    CHECK(log.find("\"total_mass\":1.0") != std::string::npos);
    const auto meta = read_text_file(s.path("simulate.json"));
    CHECK(meta.find("\"netflow_version\"") != std::string::npos);
    CHECK(meta.find("\"t\": \"1/2\"") != std::string::npos);
}

TEST_CASE("identical configurations give byte-identical artifacts") {
    Scratch a("det_a"), b("det_b");
    auto ca = simulate_g2(a.dir.string()), cb = simulate_g2(b.dir.string());
    REQUIRE(run_quiet(ca) == kExitOk);
    REQUIRE(run_quiet(cb) == kExitOk);
    for (const char* f : {"simulate.csv", "simulate.state", "simulate.log.jsonl"})
        CHECK(read_text_file(a.path(f)) == read_text_file(b.path(f)));

    RunConfig r;
    r.command = "resolvent";
    r.graph = fixture("g5.graph");
    r.state = fixture("g5_steps.state");
    r.lambda = "1,1";
    r.out_dir = a.dir.string();
    REQUIRE(run_quiet(r) == kExitOk);
    const auto first = read_text_file(a.path("resolvent.csv")) + read_text_file(a.path("resolvent.json"));
    REQUIRE(run_quiet(r) == kExitOk);
    CHECK(read_text_file(a.path("resolvent.csv")) + read_text_file(a.path("resolvent.json")) == first);
}

TEST_CASE("decimal time on the exact path is malformed input") {
    Scratch s("decimal");
    auto c = simulate_g2(s.dir.string());
    c.t = "0.5";
    std::string err;
    CHECK(run_quiet(c, nullptr, &err) == kExitMalformed);
    CHECK(err.find("0.5") != std::string::npos);
}

TEST_CASE("simulate with rational velocities and refusal of irrational ones") {
    Scratch s("velocities");
    RunConfig c;
    c.command = "simulate";
    c.graph = s.file("g2c.graph", read_text_file(fixture("g2.graph")) + "c 1 1/2\nc 2 3/2\n");
    c.state = fixture("unit_e1.state");
    c.t = "1";
    c.out_dir = s.dir.string();
    CHECK(run_quiet(c) == kExitOk);
    CHECK(read_text_file(s.path("simulate.json")).find("\"mass_drift_exact\": \"0\"") != std::string::npos);
    c.graph = fixture("g2_irrational.graph");
    CHECK(run_quiet(c) == kExitValidation);
}

TEST_CASE("resolvent verb exit codes") {
    Scratch s("resolvent");
    RunConfig c;
    c.command = "resolvent";
    c.graph = fixture("g2.graph");
    c.state = fixture("unit_e1.state");
    c.out_dir = s.dir.string();
    c.lambda = "-1";
    CHECK(run_quiet(c) == kExitValidation);
    c.lambda = "1,x";
    CHECK(run_quiet(c) == kExitMalformed);
    c.lambda = "1/100000";
    c.tol = 1e-300;
    CHECK(run_quiet(c) == kExitTolerance);
    c.tol.reset();
    c.lambda = "2";
    c.mode = "general";
    CHECK(run_quiet(c) == kExitOk);
    CHECK(read_text_file(s.path("resolvent.json")).find("\"neumann_terms\"") != std::string::npos);
}

TEST_CASE("absorb reports bounds and fails a tight tolerance with exit 2") {
    Scratch s("absorb");
    RunConfig c;
    c.command = "absorb";
    c.graph = fixture("g2.graph");
    c.state = fixture("unit_e1.state");
    c.absorption = fixture("q_step.absorption");
    c.t = "1/2";
    c.order = 4;
    c.quad_steps = 32;
    c.log_steps = 1;
    c.out_dir = s.dir.string();
    CHECK(run_quiet(c) == kExitOk);
    const auto meta = read_text_file(s.path("absorb.json"));
    CHECK(meta.find("\"tail_bound\"") != std::string::npos);
    CHECK(meta.find("\"quadrature_bound\": null") != std::string::npos);
    c.tol = 1e-12;
    CHECK(run_quiet(c) == kExitTolerance);
}

TEST_CASE("approx writes the convergence table") {
    Scratch s("approx");
    RunConfig c;
    c.command = "approx";
    c.graph = fixture("g2_irrational.graph");
    c.state = fixture("g_mixed.testfn");
    c.levels = "3..5";
    c.out_dir = s.dir.string();
    REQUIRE(run_quiet(c) == kExitOk);
    const auto csv = read_text_file(s.path("approx.csv"));
    CHECK(csv.rfind("level,velocity_error,subdivided_edges,semigroup_error,weak_error_1,weak_error_2,resolvent_error\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(read_text_file(s.path("approx.json")).find("\"resolvent_strictly_decreasing\": true") != std::string::npos);
    c.levels = "1,2";
    c.graph = fixture("g2.graph");
    CHECK(run_quiet(c) == kExitValidation);
}

TEST_CASE("level lists parse as ranges or comma lists") {
    CHECK(parse_levels("3..6") == std::vector<int>{3, 4, 5, 6});
    CHECK(parse_levels("2, 5,9") == std::vector<int>{2, 5, 9});
    CHECK_THROWS(parse_levels("a..3"));
    CHECK(parse_lambda("1/2,-3") == std::pair<double, double>{0.5, -3.0});
}

TEST_CASE("check suite passes on the shipped fixtures") {
    RunConfig c;
    c.command = "check";
    c.suite = "all";
    c.seed = 7;
    c.fixture_dir = NETFLOW_FIXTURE_DIR;
    std::string out;
    CHECK(run_quiet(c, &out) == kExitOk);
    CHECK(out.find("FAIL") == std::string::npos);
    Scratch s("check");
    s.file("broken.graph", "graph broken\nedge 1 a b\nedge 2 b a\nw 2 1 1/3\nw 1 2 1\n");
    c.fixture_dir = s.dir.string();
    c.suite = "fixtures";
    CHECK(run_quiet(c, &out) == kExitValidation);
}
