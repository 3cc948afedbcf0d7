#include "oracles.hpp"
#include "support.hpp"

#include "netflow/random_instances.hpp"

#include <doctest.h>

using namespace netflow;
using namespace testing_support;

namespace {

NetworkState two_piece(const SparseVector<Rational>& a, const SparseVector<Rational>& b, const Rational& split) {
    return NetworkState({Rational(0), split, Rational(1)}, {a, b});
}

double eval(const NetworkState& f, EdgeId id, double s) { return f.at(s).at(id).get_d(); }

}  // namespace

TEST_CASE("canonical form merges equal pieces and drops zeros") {
    NetworkState f({q("0"), q("1/3"), q("2/3"), q("1")}, {vec({{1, "1"}}), vec({{1, "1"}, {2, "0"}}), vec({})});
    CHECK(f.pieces() == 2);
    CHECK(f.breakpoints() == std::vector<Rational>{q("0"), q("2/3"), q("1")});
    NetworkState again(f.breakpoints(), f.values());
    CHECK(again == f);
}

TEST_CASE("sup_norm examples and dense sampling") {
    CHECK(sup_norm(NetworkState::constant(vec({{1, "1"}}))) == 1);
    CHECK(sup_norm(two_piece(vec({{1, "1"}}), vec({{2, "-3"}}), q("1/2"))) == 3);

    InstanceRng rng(3);
    auto g = load_graph("g5.graph");
    for (int trial = 0; trial < 20; ++trial) {
        RandomStateOptions opts;
        opts.max_pieces = 10;
        auto f = random_state(rng, *g, opts);
        Rational dense(0);
        for (int m = 0; m < 10000; ++m) {
            auto n = norm1(f.at(ratio(m, 10000)));
            if (n > dense) dense = n;
        }
        // every piece has length >= 1/144 > 1/10000, so sampling sees it
        CHECK(sup_norm(f) == dense);
    }
}

TEST_CASE("pairing examples and Riemann oracle") {
    auto e1 = NetworkState::constant(vec({{1, "1"}}));
    auto e2 = NetworkState::constant(vec({{2, "1"}}));
    CHECK(pair(e1, e1) == 1);
    CHECK(pair(e1, e2) == 0);

    NetworkState f({q("0"), q("1/5"), q("3/4"), q("1")}, {vec({{1, "2"}, {2, "-1"}}), vec({{2, "3"}}), vec({{1, "1/3"}})});
    NetworkState g({q("0"), q("1/2"), q("1")}, {vec({{1, "1"}, {2, "1"}}), vec({{2, "-2"}, {1, "5"}})});
    Rational exact = pair(f, g);
    double riemann = oracles::riemann(
        [&](double s) { return eval(f, 1, s) * eval(g, 1, s) + eval(f, 2, s) * eval(g, 2, s); }, 100000);
    CHECK(std::abs(exact.get_d() - riemann) <= 1e-6);
}

TEST_CASE("total_mass examples and Riemann oracle") {
    CHECK(total_mass(NetworkState::constant(vec({{1, "1"}}))) == 1);
    CHECK(total_mass(two_piece(vec({{1, "2"}}), vec({}), q("1/4"))) == q("1/2"));

    InstanceRng rng(4);
    auto g = load_graph("g5.graph");
    RandomStateOptions opts;
    opts.max_pieces = 10;
    for (int trial = 0; trial < 10; ++trial) {
        auto f = random_state(rng, *g, opts);
        double riemann = oracles::riemann(
            [&](double s) {
                double t = 0;
                for (const auto& [id, x] : f.at(s)) t += x.get_d();
                return t;
            },
            100000);
        CHECK(std::abs(total_mass(f).get_d() - riemann) <= 1e-3);
    }
}

TEST_CASE("traces and boundary residual") {
    auto op = build_adjacency(load_graph("g2.graph"));
    auto c = NetworkState::constant(vec({{1, "1"}}));
    auto [a0, a1] = traces(c);
    CHECK(a0 == vec({{1, "1"}}));
    CHECK(a1 == vec({{1, "1"}}));
    CHECK(boundary_residual(c, op) == 2.0);

    auto f = two_piece(vec({{1, "1"}}), vec({{2, "1"}}), q("1/2"));
    CHECK(traces(f).first == vec({{1, "1"}}));
    CHECK(traces(f).second == vec({{2, "1"}}));
    CHECK(boundary_residual(f, op) == 0.0);
    CHECK(boundary_residual(NetworkState{}, op) == 0.0);
}

TEST_CASE("sampling uses right-open pieces") {
    auto c = sample(NetworkState::constant(vec({{1, "1"}})), 4);
    CHECK(c.samples.size() == 5);
    for (const auto& s : c.samples) CHECK(s == vec({{1, "1"}}));

    auto f = two_piece(vec({{1, "1"}}), vec({{2, "1"}}), q("1/2"));
    auto s = sample(f, 2);
    CHECK(s.samples[0] == vec({{1, "1"}}));
    CHECK(s.samples[1] == vec({{2, "1"}}));
    CHECK(s.samples[2] == vec({{2, "1"}}));

    InstanceRng rng(8);
    auto g = load_graph("g5.graph");
    auto r = random_state(rng, *g);
    auto rs = sample(r, 97);
    for (int m = 0; m <= 97; ++m) {
        // direct evaluation: find the piece by linear scan
        const auto& bp = r.breakpoints();
        std::size_t k = 0;
        while (k + 2 < bp.size() && bp[k + 1] <= ratio(m, 97)) ++k;
        CHECK(rs.samples[m] == r.values()[k]);
    }
}

TEST_CASE("pairing is bilinear and obeys the Hoelder bound") {
    InstanceRng rng(21);
    auto g = load_graph("g5.graph");
    for (int trial = 0; trial < 40; ++trial) {
        auto f1 = random_state(rng, *g);
        auto f2 = random_state(rng, *g);
        auto h = random_state(rng, *g);
        Rational a = rng.rational(Rational(-3), Rational(3), 4);
        CHECK(pair(scale(f1, a) + f2, h) == a * pair(f1, h) + pair(f2, h));
        CHECK(abs(pair(f1, h)) <= sup_norm(f1) * l1_norm(h));
    }
}

TEST_CASE("trapezoid pairing of sampled states converges at first order") {
    auto f = two_piece(vec({{1, "1"}}), vec({{1, "3"}}), q("1/3"));
    auto g = NetworkState::constant(vec({{1, "1"}}));
    const double exact = pair(f, g).get_d();
    double prev = 0;
    for (int M : {16, 32, 64, 128, 256}) {
        double err = std::abs(pair(sample(convert_state<double>(f), M), g) - exact);
        CHECK(err <= 2.0 / M);
        if (M > 16) CHECK(err <= prev);
        prev = err;
    }
}
