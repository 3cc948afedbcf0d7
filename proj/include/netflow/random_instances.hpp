#pragma once

#include "netflow/graph.hpp"
#include "netflow/state.hpp"

#include <cstdint>
#include <memory>
#include <random>

namespace netflow {

/// Small portable generator helpers on top of mt19937_64 raw output, so that
/// instances are identical across standard libraries.
class InstanceRng {
public:
    explicit InstanceRng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform integer in [lo, hi].
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);
    bool coin() { return uniform(0, 1) == 1; }
    /// p/q with 1 <= q <= max_den and the value in [lo, hi].
    Rational rational(const Rational& lo, const Rational& hi, std::int64_t max_den);

private:
    std::mt19937_64 engine_;
};

struct RandomGraphOptions {
    int min_edges = 2;
    int max_edges = 12;
};

/// Strongly connected simple graph: a directed cycle through all vertices plus
/// random extra edges, with random column-stochastic rational weights.
std::shared_ptr<const MetricGraph> random_graph(InstanceRng& rng, const RandomGraphOptions& opts = {});

struct RandomStateOptions {
    int max_pieces = 8;
    std::int64_t max_den = 12;
    bool nonnegative = false;
};

NetworkState random_state(InstanceRng& rng, const MetricGraph& g, const RandomStateOptions& opts = {});

/// Rational in [0, max] with denominator at most max_den.
Rational random_time(InstanceRng& rng, const Rational& max, std::int64_t max_den = 8);

}  // namespace netflow
