#include "oracles.hpp"
#include "support.hpp"

#include "netflow/absorption.hpp"
#include "netflow/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace netflow;
using namespace testing_support;

namespace {

AbsorptionProfile constant_rate(const MetricGraph& g, double q0) {
    std::vector<std::pair<EdgeId, double>> entries;
    for (EdgeId id : g.edge_ids()) entries.emplace_back(id, q0);
    return {RealStepState::constant(SparseVector<double>::from_entries(entries))};
}

double sample_distance(const SampledState<double>& a, const SampledState<double>& b) {
    double d = 0.0;
    for (std::size_t m = 0; m < a.samples.size(); ++m) d = std::max(d, norm1(a.samples[m] - b.samples[m]));
    return d;
}

}  // namespace

TEST_CASE("zero absorption reproduces the transport semigroup exactly") {
    auto g2 = load_graph("g2.graph");
    auto vel = exact_velocities({{1, "1/2"}, {2, "3/2"}});
    auto plan = subdivide(g2, vel);
    auto f = read_state_file(fixture("g5_steps.state"));
    f = NetworkState(f.breakpoints(), [&] {
        std::vector<SparseVector<Rational>> v;
        for (const auto& x : f.values()) {
            std::vector<std::pair<EdgeId, Rational>> keep;
            for (const auto& e : x)
                if (e.first <= 2) keep.push_back(e);
            v.push_back(SparseVector<Rational>::from_entries(keep));
        }
        return v;
    }());
    AbsorbingOptions opts;
    opts.order = 4;
    opts.quad_steps = 16;
    opts.grid = 100;
    auto res = evolve_absorbing(plan, AbsorptionProfile{}, f, q("5/4"), opts);
    auto exact = sample(convert_state<double>(evolve_rational(plan, f, q("5/4"))), 100);
    for (int m = 0; m <= 100; ++m) CHECK(res.samples.samples[m] == exact.samples[m]);
    CHECK(res.tail_bound == 0.0);
}

TEST_CASE("constant absorption is a scalar factor") {
    auto g5 = load_graph("g5.graph");
    auto op = build_adjacency(g5);
    auto f = read_state_file(fixture("g5_steps.state"));
    const double q0 = -0.5;
    AbsorbingOptions opts;
    opts.order = 8;
    opts.quad_steps = 256;
    opts.grid = 200;
    const Rational t = q("1");
    auto res = evolve_absorbing(op, constant_rate(*g5, q0), f, t, opts);
    REQUIRE(res.quadrature_bound);
    const double bound = res.tail_bound + *res.quadrature_bound;
    INFO("tail " << res.tail_bound << " quad " << *res.quadrature_bound);
    CHECK(bound <= 1e-6);
    auto ref = sample(scale(convert_state<double>(evolve_unit(op, f, t)), std::exp(q0)), 200);
    CHECK(sample_distance(res.samples, ref) <= bound);
}

TEST_CASE("constant absorption with rational velocities") {
    auto g2 = load_graph("g2.graph");
    auto plan = subdivide(g2, exact_velocities({{1, "2"}, {2, "1"}}));
    auto f = NetworkState::constant(vec({{1, "1"}, {2, "1/2"}}));
    const double q0 = 0.4;
    AbsorbingOptions opts;
    opts.grid = 64;
    auto res = evolve_absorbing(plan, constant_rate(*g2, q0), f, q("1"), opts);
    REQUIRE(res.quadrature_bound);
    auto ref = sample(scale(convert_state<double>(evolve_rational(plan, f, q("1"))), std::exp(q0)), 64);
    CHECK(sample_distance(res.samples, ref) <= res.tail_bound + *res.quadrature_bound);
    CHECK(res.growth_bound >= 1.0);
}

TEST_CASE("nonconstant absorption against upwind finite volumes") {
    auto g2 = load_graph("g2.graph");
    auto op = build_adjacency(g2);
    auto qfile = read_real_state_file(fixture("q_step.absorption"));
    AbsorptionProfile rate{qfile};
    auto f = NetworkState({q("0"), q("1/3"), q("1")}, {vec({{1, "1"}}), vec({{1, "2"}, {2, "1"}})});
    AbsorbingOptions opts;
    opts.order = 6;
    opts.quad_steps = 64;
    // sample points on the panel lattice h = 1/128
    opts.grid = 64;
    auto res = evolve_absorbing(op, rate, f, q("1/2"), opts);
    CHECK_FALSE(res.quadrature_bound);

    const int cells = 10240;
    oracles::UpwindOracle fv(*g2, cells);
    auto u = fv.run([&](EdgeId id, double s) { return f.at(s).at(id).get_d(); },
                    [&](EdgeId id, double s) { return qfile.at(s).at(id); }, cells / 2);
    double worst = 0.0;
    for (int m = 0; m <= 64; ++m) {
        const int cell = std::min(cells - 1, m * (cells / 64));
        for (EdgeId id : fv.ids()) worst = std::max(worst, std::abs(res.samples.samples[m].at(id) - u[fv.row(id)][cell]));
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("absorption argument checks") {
    auto g2 = load_graph("g2.graph");
    auto op = build_adjacency(g2);
    AbsorbingOptions opts;
    opts.quad_steps = 0;
    CHECK_THROWS_AS(evolve_absorbing(op, AbsorptionProfile{}, NetworkState{}, q("1"), opts), ArgumentError);
    opts.quad_steps = 4;
    opts.order = 0;
    auto res = evolve_absorbing(op, constant_rate(*g2, -3.0), NetworkState::constant(vec({{1, "1"}})), q("2"), opts);
    CHECK(res.tail_bound > 1.0);
}
