#include "support.hpp"

#include "netflow/errors.hpp"

#include <doctest.h>

using namespace netflow;
using namespace testing_support;

TEST_CASE("graph parser") {
    auto gf = parse_graph("graph T\nedge 1 a b\nedge 2 b a\nw 2 1 1\nw 1 2 1\nc 1 3/2\nc 2 sqrt(2)\n");
    CHECK(gf.graph->edge_ids() == std::vector<EdgeId>{1, 2});
    REQUIRE(gf.velocities);
    CHECK(gf.velocities->at(1).exact == q("3/2"));
    CHECK_FALSE(gf.velocities->at(2).exact);
    CHECK(gf.velocities->at(2).value == doctest::Approx(std::sqrt(2.0)));

    auto sq = parse_graph("graph T\nedge 1 a b\nedge 2 b a\nw 2 1 1\nw 1 2 1\nc 1 sqrt(9/4)\nc 2 1\n");
    CHECK(sq.velocities->at(1).exact == q("3/2"));

    CHECK_THROWS_AS(parse_graph("edge 1 a b\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("graph T\nedge 1 a b\nedge 1 b a\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("graph T\nedge 1 a b\nedge 2 c a\nw 2 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("graph T\nedge 1 a b\nw 1 1 0.5\n"), ParseError);
    try {
        parse_graph("graph T\nedge 1 a b\nbogus\n", "x.graph");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 3);
        CHECK(std::string(e.what()).find("x.graph") != std::string::npos);
    }
}

TEST_CASE("graph format round trip") {
    auto gf = read_graph_file(fixture("g5.graph"));
    auto again = parse_graph(format_graph(*gf.graph, gf.velocities));
    CHECK(again.graph->edge_ids() == gf.graph->edge_ids());
    for (EdgeId j : gf.graph->edge_ids()) CHECK(again.graph->column(j) == gf.graph->column(j));
}

TEST_CASE("state files") {
    auto f = read_state_file(fixture("g5_steps.state"));
    CHECK(f.pieces() == 4);
    CHECK(f.at(q("7/8")) == vec({{1, "-1/2"}, {5, "3/2"}}));
    auto again = to_network_state(parse_step_file(format_state(f, "x")));
    CHECK(again == f);

    CHECK_THROWS_WITH_AS(to_network_state(parse_step_file("state s\nbp 0 1\nv 0 1 0.5\n")), doctest::Contains("decimal literal"), ParseError);
    auto real = to_real_state(parse_step_file("state s\nbp 0 1\nv 0 1 0.5\n"));
    CHECK(real.at(0.3).at(1) == 0.5);
    CHECK_THROWS_AS(parse_step_file("bp 0 1\n"), ParseError);
    CHECK_THROWS_AS(to_network_state(parse_step_file("state s\nbp 0 1\nv 3 1 1\n")), ParseError);
    CHECK_THROWS_AS(parse_step_file("state s\nbp 0 1/2 1/3 1\n"), ParseError);
}

TEST_CASE("csv emission") {
    SampledState<double> empty;
    empty.grid = 2;
    empty.samples.assign(3, {});
    CHECK(format_csv(empty) == "s\n");

    auto c = sample(convert_state<double>(NetworkState::constant(vec({{1, "1"}, {2, "1/3"}}))), 2);
    std::string csv = format_csv(c);
    CHECK(csv.rfind("s,edge_1,edge_2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(format_csv(c) == csv);

    auto back = parse_csv(csv);
    CHECK(back.grid == 2);
    REQUIRE(back.samples.size() == 3);
    for (int m = 0; m < 3; ++m) CHECK(back.samples[m] == c.samples[m]);
}

TEST_CASE("complex csv splits real and imaginary parts") {
    SampledState<std::complex<double>> z;
    z.grid = 1;
    z.samples = {SparseVector<std::complex<double>>::unit(1, {1.0, 2.0}),
                 SparseVector<std::complex<double>>::unit(1, {0.5, 0.0})};
    std::string csv = format_csv(z);
    CHECK(csv.rfind("s,edge_1_re,edge_1_im\n", 0) == 0);

    z.samples[0] = SparseVector<std::complex<double>>::unit(1, {1.0, 0.0});
    CHECK(format_csv(z).rfind("s,edge_1\n", 0) == 0);
}
