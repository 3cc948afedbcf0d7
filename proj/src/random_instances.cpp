#include "netflow/random_instances.hpp"

#include <set>

namespace netflow {

std::int64_t InstanceRng::uniform(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = span == 0 ? 0 : (~std::uint64_t{0} / span) * span;
    std::uint64_t x = engine_();
    while (span != 0 && x >= limit) x = engine_();
    return lo + static_cast<std::int64_t>(span == 0 ? x : x % span);
}

Rational InstanceRng::rational(const Rational& lo, const Rational& hi, std::int64_t max_den) {
    const std::int64_t q = uniform(1, max_den);
    const std::int64_t a = to_int64(floor(lo * q)) + (floor(lo * q) == lo * q ? 0 : 1);
    const std::int64_t b = to_int64(floor(hi * q));
    if (a > b) return lo;
    Rational r(uniform(a, b), q);
    r.canonicalize();
    return r;
}

std::shared_ptr<const MetricGraph> random_graph(InstanceRng& rng, const RandomGraphOptions& opts) {
    const int m = static_cast<int>(rng.uniform(opts.min_edges, opts.max_edges));
    const int n = static_cast<int>(rng.uniform(2, m));
    std::vector<Edge> edges;
    std::set<std::pair<int, int>> used;
    auto name = [](int v) { return "v" + std::to_string(v); };
    for (int v = 0; v < n; ++v) {
        int w = (v + 1) % n;
        used.insert({v, w});
        edges.push_back({static_cast<EdgeId>(edges.size() + 1), name(v), name(w)});
    }
    const std::size_t capacity = static_cast<std::size_t>(n) * (n - 1);
    while (static_cast<int>(edges.size()) < m && used.size() < capacity) {
        int a = static_cast<int>(rng.uniform(0, n - 1));
        int b = static_cast<int>(rng.uniform(0, n - 1));
        if (a == b || !used.insert({a, b}).second) continue;
        edges.push_back({static_cast<EdgeId>(edges.size() + 1), name(a), name(b)});
    }
    std::vector<Weight> weights;
    for (const auto& j : edges) {
        std::vector<std::pair<EdgeId, std::int64_t>> shares;
        std::int64_t total = 0;
        for (const auto& i : edges)
            if (i.tail == j.head) {
                std::int64_t a = rng.uniform(1, 6);
                shares.emplace_back(i.id, a);
                total += a;
            }
        for (const auto& [i, a] : shares) weights.push_back({i, j.id, ratio(a, total)});
    }
    for (auto& w : weights) w.w.canonicalize();
    return std::make_shared<const MetricGraph>(MetricGraph::finite("random", std::move(edges), weights));
}

NetworkState random_state(InstanceRng& rng, const MetricGraph& g, const RandomStateOptions& opts) {
    const auto ids = g.edge_ids();
    const int k = static_cast<int>(rng.uniform(1, opts.max_pieces));
    std::set<Rational> inner;
    for (int attempt = 0; static_cast<int>(inner.size()) < k - 1 && attempt < 100; ++attempt) {
        Rational b = rng.rational(Rational(0), Rational(1), opts.max_den);
        if (sgn(b) > 0 && b < 1) inner.insert(b);
    }
    std::vector<Rational> bp{Rational(0)};
    bp.insert(bp.end(), inner.begin(), inner.end());
    bp.push_back(Rational(1));
    std::vector<SparseVector<Rational>> vals;
    const Rational lo = opts.nonnegative ? Rational(0) : Rational(-5);
    for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
        std::vector<std::pair<EdgeId, Rational>> entries;
        for (EdgeId id : ids)
            if (rng.coin()) entries.emplace_back(id, rng.rational(lo, Rational(5), 6));
        vals.push_back(SparseVector<Rational>::from_entries(std::move(entries)));
    }
    return NetworkState(std::move(bp), std::move(vals));
}

Rational random_time(InstanceRng& rng, const Rational& max, std::int64_t max_den) {
    return rng.rational(Rational(0), max, max_den);
}

}  // namespace netflow
