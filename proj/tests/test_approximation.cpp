#include "oracles.hpp"
#include "support.hpp"

#include "netflow/approximation.hpp"
#include "netflow/errors.hpp"
#include "netflow/random_instances.hpp"
#include "netflow/semigroup.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>

using namespace netflow;
using namespace testing_support;

namespace {

VelocityProfile irrational_g2() { return read_graph_file(fixture("g2_irrational.graph")).velocities.value(); }

NetworkState mixed_state() { return read_state_file(fixture("g_mixed.testfn")); }

TestFunction unit_on(EdgeId id) { return TestFunction::constant(SparseVector<Rational>::from_entries({{id, Rational(1)}})); }

}  // namespace

TEST_CASE("continued-fraction convergents follow the textbook recurrence") {
    const auto expect = oracles::convergents(std::sqrt(2.0), 8);
    REQUIRE(expect.size() == 8);
    for (int n = 1; n <= 8; ++n) {
        const auto [p, q] = expect[n - 1];
        CHECK(continued_fraction_convergent(from_double(std::sqrt(2.0)), n) == ratio(static_cast<long>(p), static_cast<long>(q)));
    }
    CHECK(continued_fraction_convergent(from_double(std::sqrt(2.0)), 5) == q("41/29"));
    for (double x : {std::sqrt(3.0), M_PI, 0.7071}) {
        const auto ref = oracles::convergents(x, 6);
        for (std::size_t n = 1; n <= ref.size(); ++n)
            CHECK(continued_fraction_convergent(from_double(x), static_cast<int>(n)) == ratio(static_cast<long>(ref[n - 1].first), static_cast<long>(ref[n - 1].second)));
    }
}

TEST_CASE("convergents use the exact value of the double") {
    // the double nearest 0.0025 lies just above 1/400, so 1/x has integer part 399
    CHECK(from_double(2.5e-3) > q("1/400"));
    CHECK(continued_fraction_convergent(from_double(2.5e-3), 2) == q("1/399"));
}

TEST_CASE("a rational velocity is a fixed point of deep enough convergents") {
    CHECK(continued_fraction_convergent(q("3/2"), 1) == 1);
    for (int n = 2; n < 10; ++n) CHECK(continued_fraction_convergent(q("3/2"), n) == q("3/2"));
    CHECK(continued_fraction_convergent(q("-7/3"), 1) == -3);
}

TEST_CASE("decimal truncation floors at n digits") {
    CHECK(decimal_truncation(from_double(M_PI), 3) == q("3141/1000"));
    CHECK(decimal_truncation(q("3/2"), 4) == q("3/2"));
    CHECK(decimal_truncation(from_double(std::sqrt(2.0)), 0) == 1);
}

TEST_CASE("convergents past 64-bit denominators overflow") {
    Integer big;
    mpz_ui_pow_ui(big.get_mpz_t(), 2, 70);
    CHECK_THROWS_AS(continued_fraction_convergent(ratio(big + 1, 3), 1), OverflowError);
    CHECK_THROWS_AS(continued_fraction_convergent(ratio(Integer(1), big), 2), OverflowError);
}

TEST_CASE("schedules check level order and the velocity band") {
    auto g = load_graph("g2.graph");
    auto vel = irrational_g2();
    auto s = make_schedule(*g, vel, default_levels(ApproxMethod::ContinuedFraction), ApproxMethod::ContinuedFraction);
    REQUIRE(s.profiles.size() == 6);
    CHECK(s.profiles[0].at(1).exact == q("7/5"));
    CHECK(s.profiles[0].at(2).exact == q("5/3"));
    CHECK_THROWS_AS(make_schedule(*g, vel, {3, 3}, ApproxMethod::ContinuedFraction), ArgumentError);
    VelocityProfile slow;
    slow.set(1, Velocity::real(0.3));
    slow.set(2, Velocity::real(0.35));
    // first convergent of 0.3 is 0
    CHECK_THROWS_AS(make_schedule(*g, slow, {1, 2}, ApproxMethod::ContinuedFraction), ArgumentError);
    CHECK_NOTHROW(make_schedule(*g, slow, {2, 3}, ApproxMethod::ContinuedFraction));
    // the velocity errors shrink level over level
    for (std::size_t k = 1; k < s.profiles.size(); ++k)
        for (EdgeId j : {1, 2})
            CHECK(std::abs(to_double(*s.profiles[k].at(j).exact) - vel.at(j).value) <
                  std::abs(to_double(*s.profiles[k - 1].at(j).exact) - vel.at(j).value));
}

TEST_CASE("characteristic tracing matches the exact oracle at rational velocities") {
    auto g = load_graph("g5.graph");
    auto vel = exact_velocities({{1, "1"}, {2, "2"}, {3, "1/3"}, {4, "3/2"}, {5, "1/2"}});
    std::map<EdgeId, Rational> cmap;
    for (const auto& [id, v] : vel.entries()) cmap[id] = *v.exact;
    oracles::CharacteristicTracer oracle(*g, cmap);
    auto f = read_state_file(fixture("g5_steps.state"));
    for (const char* tt : {"0", "1/3", "1", "7/4"}) {
        const Rational t = q(tt);
        auto traced = trace_state(*g, vel, f, to_double(t));
        double worst = 0.0;
        for (int m = 0; m < 1000; ++m) {
            const Rational s = ratio(2 * m + 1, 2000);
            for (EdgeId j : g->edge_ids())
                worst = std::max(worst, std::abs(traced.at(s).at(j) - to_double(oracle.value(f, j, s, t))));
        }
        CAPTURE(tt);
        CHECK(worst <= 1e-12);
        // the reconstructed pieces pair like the exact evolution
        auto exact = evolve_rational(g, vel, f, t);
        auto gfun = unit_on(1) + unit_on(3);
        CHECK(std::abs(pair(traced, gfun) - to_double(pair(exact, gfun))) < 1e-12);
    }
}

TEST_CASE("semigroup convergence stabilises at rational velocities") {
    auto g = load_graph("g2.graph");
    auto vel = exact_velocities({{1, "3/2"}, {2, "7/5"}});
    auto s = make_schedule(*g, vel, {1, 2, 3, 4}, ApproxMethod::ContinuedFraction);
    auto table = semigroup_convergence(g, vel, mixed_state(), q("1"), {unit_on(1), unit_on(2)}, s);
    CHECK(table.exact_reference);
    REQUIRE(table.rows.size() == 4);
    // 3/2 = [1; 2] and 7/5 = [1; 2, 2]: both exact from level 3 on
    for (std::size_t k = 2; k < 4; ++k) {
        CHECK(table.rows[k].velocity_error == 0.0);
        CHECK(*table.rows[k].semigroup_error == 0.0);
        for (double e : table.rows[k].weak_errors) CHECK(e == 0.0);
    }
    CHECK(*table.rows[0].semigroup_error > 0.0);
    CHECK(hoelder_holds(table));
}

TEST_CASE("zero state gives zero errors") {
    auto g = load_graph("g2.graph");
    auto vel = irrational_g2();
    auto s = make_schedule(*g, vel, {3, 4, 5}, ApproxMethod::ContinuedFraction);
    auto table = semigroup_convergence(g, vel, NetworkState{}, q("1"), {unit_on(1)}, s);
    for (const auto& row : table.rows) CHECK(row.weak_errors[0] == 0.0);
    auto rtable = resolvent_convergence(g, vel, {1.0, 0.0}, NetworkState{}, s);
    for (const auto& row : rtable.rows) CHECK(*row.resolvent_error == 0.0);
}

TEST_CASE("irrational velocities: semigroup and resolvent errors fall along convergents") {
    const auto start = std::chrono::steady_clock::now();
    auto g = load_graph("g2.graph");
    auto vel = irrational_g2();
    auto s = make_schedule(*g, vel, default_levels(ApproxMethod::ContinuedFraction), ApproxMethod::ContinuedFraction);
    auto f = mixed_state();
    auto semi = semigroup_convergence(g, vel, f, q("1"), {unit_on(1), unit_on(2)}, s);
    CHECK_FALSE(semi.exact_reference);
    for (std::size_t k = 1; k < semi.rows.size(); ++k) {
        CAPTURE(k);
        CHECK(semi.rows[k].weak_errors[0] < semi.rows[k - 1].weak_errors[0]);
    }
    CHECK(hoelder_holds(semi));

    auto res = resolvent_convergence(g, vel, {1.0, 0.0}, f, s);
    for (std::size_t k = 1; k < res.rows.size(); ++k)
        CHECK(*res.rows[k].resolvent_error < *res.rows[k - 1].resolvent_error);
    CHECK(*res.rows.back().resolvent_error <= 1e-4);
    REQUIRE(res.fit_slope);
    CHECK(*res.fit_slope > 0.0);
    for (const auto& row : res.rows) CHECK(*row.resolvent_error <= 3.0 * *res.fit_slope * row.velocity_error + 1e-9);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(secs < 60.0);
}

TEST_CASE("identical profiles give identical rows") {
    auto g = load_graph("g2.graph");
    auto vel = exact_velocities({{1, "3/2"}, {2, "2"}});
    auto s = make_schedule(*g, vel, {2, 3, 5}, ApproxMethod::ContinuedFraction);
    auto r = resolvent_convergence(g, vel, {1.0, 0.5}, mixed_state(), s);
    CHECK(*r.rows[1].resolvent_error == *r.rows[2].resolvent_error);
    CHECK(*r.rows[2].resolvent_error == 0.0);
}
