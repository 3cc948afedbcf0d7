#include "netflow/semigroup.hpp"

#include "netflow/errors.hpp"

#include <algorithm>
#include <set>

namespace netflow {

Rational parse_time(std::string_view text) {
    Rational t = parse_rational(text);
    if (sgn(t) < 0) throw DomainError("time must be nonnegative, got " + std::string(text));
    return t;
}

template <class T>
StepState<T> shift_evolve(const AdjacencyOperator& op, const StepState<T>& f, const Rational& t) {
    if (sgn(t) < 0) throw DomainError("evolution time must be nonnegative");
    if (sgn(t) == 0) return f;
    const Integer whole = floor(t);
    const Rational u = t - Rational(whole);
    const std::int64_t n0 = to_int64(whole);

    const auto& bp = f.breakpoints();
    const auto& vals = f.values();
    const std::size_t k = f.pieces();

    // Only pieces that reach the output need B^n0 applied.
    std::vector<SparseVector<T>> powered(k);
    std::vector<bool> needed(k, false);
    for (std::size_t m = 0; m < k; ++m) needed[m] = bp[m + 1] > u || bp[m] < u;
    for (std::size_t m = 0; m < k; ++m) {
        if (!needed[m]) continue;
        powered[m] = op.apply_power(vals[m], n0);
    }

    std::vector<Rational> out_bp{Rational(0)};
    std::vector<SparseVector<T>> out_vals;
    // s in [0, 1-u): source x = u + s, value B^n0 f(x)
    for (std::size_t m = 0; m < k; ++m) {
        if (!(bp[m + 1] > u)) continue;
        out_vals.push_back(powered[m]);
        out_bp.push_back(bp[m + 1] - u);
    }
    // s in [1-u, 1): source x = u + s - 1, value B^(n0+1) f(x)
    if (sgn(u) > 0) {
        for (std::size_t m = 0; m < k; ++m) {
            if (!(bp[m] < u)) break;
            out_vals.push_back(op.apply(powered[m]));
            const Rational& end = bp[m + 1] < u ? bp[m + 1] : u;
            out_bp.push_back(end + 1 - u);
        }
    }
    return StepState<T>(std::move(out_bp), std::move(out_vals));
}

template StepState<Rational> shift_evolve(const AdjacencyOperator&, const StepState<Rational>&, const Rational&);
template StepState<double> shift_evolve(const AdjacencyOperator&, const StepState<double>&, const Rational&);

NetworkState evolve_unit(const AdjacencyOperator& op, const NetworkState& f, const Rational& t) {
    if (op.scaled())
        throw WrongOperatorError("evolve_unit needs the unscaled operator B; use evolve_rational for velocities");
    return shift_evolve(op, f, t);
}

// ---------------------------------------------------------------------------
// Subdivision

MultiplierSeed common_multiplier(const VelocityProfile& vel, const std::vector<EdgeId>& edges, int max_bits) {
    if (edges.empty()) throw ArgumentError("common multiplier of an empty edge set");
    Integer num_lcm(1), den_gcd(0);
    for (EdgeId j : edges) {
        const Velocity& v = vel.at(j);
        if (!v.exact)
            throw NotRationalError("velocity of edge " + std::to_string(j) + " is not rational");
        Rational q = *v.exact;
        q.canonicalize();
        mpz_lcm(num_lcm.get_mpz_t(), num_lcm.get_mpz_t(), q.get_num_mpz_t());
        mpz_gcd(den_gcd.get_mpz_t(), den_gcd.get_mpz_t(), q.get_den_mpz_t());
        if (mpz_sizeinbase(num_lcm.get_mpz_t(), 2) > static_cast<std::size_t>(max_bits)) {
            std::string ids;
            for (EdgeId e : edges) ids += (ids.empty() ? "" : ",") + std::to_string(e);
            throw OverflowError("common multiplier exceeds " + std::to_string(max_bits) +
                                " bits at edge " + std::to_string(j) + " of edge set {" + ids + "}");
        }
    }
    MultiplierSeed seed;
    seed.c = ratio(num_lcm, den_gcd);
    seed.c.canonicalize();
    for (EdgeId j : edges) {
        Rational ratio = seed.c / *vel.at(j).exact;
        if (ratio.get_den() != 1) throw Error("internal: c / c_j not integral");
        seed.ell[j] = to_int64(ratio.get_num());
    }
    return seed;
}

bool SubdivisionPlan::is_identity() const {
    return std::all_of(ell.begin(), ell.end(), [](const auto& kv) { return kv.second == 1; });
}

SubdivisionPlan subdivide(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel) {
    if (!g) throw ArgumentError("null graph");
    if (!g->is_finite()) throw ArgumentError("subdivision needs a finite graph");
    const auto ids = g->edge_ids();
    SubdivisionPlan plan;
    MultiplierSeed seed = common_multiplier(vel, ids);
    plan.c = seed.c;
    plan.ell = seed.ell;
    plan.original = g;
    plan.velocity = vel;

    EdgeId next = ids.empty() ? 0 : ids.back() + 1;
    std::vector<Edge> edges;
    std::vector<Weight> weights;
    for (const auto& e : g->edges()) {
        const std::int64_t l = plan.ell.at(e.id);
        auto& subs = plan.sub_edges[e.id];
        for (std::int64_t k = 1; k <= l; ++k) {
            EdgeId sid = k == 1 ? e.id : next++;
            subs.push_back(sid);
            plan.origin[sid] = {e.id, k};
            auto inserted = [&](std::int64_t pos) { return "~" + std::to_string(e.id) + ":" + std::to_string(pos); };
            Edge sub{sid, k == l ? e.tail : inserted(k), k == 1 ? e.head : inserted(k - 1)};
            edges.push_back(sub);
            plan.sub_velocity.set(sid, vel.at(e.id));
        }
        for (std::int64_t k = 1; k < l; ++k) weights.push_back({subs[k - 1], subs[k], Rational(1)});
    }
    for (const auto& e : g->edges())
        for (const auto& [i, w] : g->column(e.id))
            weights.push_back({plan.sub_edges.at(i).back(), plan.sub_edges.at(e.id).front(), w});

    plan.subdivided = std::make_shared<const MetricGraph>(
        MetricGraph::finite(g->name() + "~", std::move(edges), weights));
    plan.op = std::make_shared<const AdjacencyOperator>(plan.subdivided, plan.sub_velocity);
    return plan;
}

template <class T>
StepState<T> lift_state(const SubdivisionPlan& plan, const StepState<T>& f) {
    const auto support = f.support();
    for (EdgeId j : support)
        if (!plan.ell.count(j)) throw ArgumentError("state has edge " + std::to_string(j) + " unknown to the plan");

    std::set<std::int64_t> ells;
    for (EdgeId j : support) ells.insert(plan.ell.at(j));
    std::vector<Rational> grid{Rational(0), Rational(1)};
    for (std::size_t m = 1; m + 1 < f.breakpoints().size(); ++m)
        for (std::int64_t l : ells) {
            Rational s = frac(f.breakpoints()[m] * l);
            if (sgn(s) > 0) grid.push_back(s);
        }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<SparseVector<T>> vals;
    vals.reserve(grid.size() - 1);
    for (std::size_t p = 0; p + 1 < grid.size(); ++p) {
        const Rational mid = (grid[p] + grid[p + 1]) / 2;
        std::vector<std::pair<EdgeId, T>> entries;
        for (EdgeId j : support) {
            const std::int64_t l = plan.ell.at(j);
            const auto& subs = plan.sub_edges.at(j);
            for (std::int64_t k = 1; k <= l; ++k) {
                T x = f.at(Rational((k - 1) + mid) / l).at(j);
                if (!ScalarTraits<T>::is_zero(x)) entries.emplace_back(subs[k - 1], std::move(x));
            }
        }
        vals.push_back(SparseVector<T>::from_entries(std::move(entries)));
    }
    return StepState<T>(std::move(grid), std::move(vals));
}

template <class T>
StepState<T> project_state(const SubdivisionPlan& plan, const StepState<T>& lifted) {
    std::set<EdgeId> parents;
    for (EdgeId sid : lifted.support()) {
        auto it = plan.origin.find(sid);
        if (it == plan.origin.end())
            throw ArgumentError("state has edge " + std::to_string(sid) + " unknown to the subdivided graph");
        parents.insert(it->second.edge);
    }
    const auto& sg = lifted.breakpoints();
    std::set<std::int64_t> ells;
    for (EdgeId j : parents) ells.insert(plan.ell.at(j));
    std::vector<Rational> grid{Rational(0), Rational(1)};
    for (std::int64_t l : ells)
        for (std::int64_t k = 1; k <= l; ++k)
            for (std::size_t m = 0; m + 1 < sg.size(); ++m) {
                Rational x = (Rational(k - 1) + sg[m]) / l;
                if (sgn(x) > 0) grid.push_back(x);
            }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<SparseVector<T>> vals;
    vals.reserve(grid.size() - 1);
    for (std::size_t p = 0; p + 1 < grid.size(); ++p) {
        const Rational mid = (grid[p] + grid[p + 1]) / 2;
        std::vector<std::pair<EdgeId, T>> entries;
        for (EdgeId j : parents) {
            const std::int64_t l = plan.ell.at(j);
            const Rational scaled = mid * l;
            const std::int64_t k = to_int64(floor(scaled)) + 1;
            const Rational sigma = scaled - (k - 1);
            T x = lifted.at(sigma).at(plan.sub_edges.at(j)[k - 1]);
            if (!ScalarTraits<T>::is_zero(x)) entries.emplace_back(j, std::move(x));
        }
        vals.push_back(SparseVector<T>::from_entries(std::move(entries)));
    }
    return StepState<T>(std::move(grid), std::move(vals));
}

template StepState<Rational> lift_state(const SubdivisionPlan&, const StepState<Rational>&);
template StepState<double> lift_state(const SubdivisionPlan&, const StepState<double>&);
template StepState<Rational> project_state(const SubdivisionPlan&, const StepState<Rational>&);
template StepState<double> project_state(const SubdivisionPlan&, const StepState<double>&);

NetworkState evolve_rational(const SubdivisionPlan& plan, const NetworkState& f, const Rational& t) {
    if (sgn(t) < 0) throw DomainError("evolution time must be nonnegative");
    return project_state(plan, shift_evolve(*plan.op, lift_state(plan, f), plan.c * t));
}

NetworkState evolve_rational(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel,
                             const NetworkState& f, const Rational& t) {
    return evolve_rational(subdivide(std::move(g), vel), f, t);
}

std::vector<EdgeId> reachable_edges(const AdjacencyOperator& op, const std::vector<EdgeId>& from, int steps) {
    std::set<EdgeId> seen(from.begin(), from.end());
    std::vector<EdgeId> frontier(from.begin(), from.end());
    for (int s = 0; s < steps && !frontier.empty(); ++s) {
        std::vector<EdgeId> next;
        for (EdgeId j : frontier)
            for (const auto& [i, w] : op.column(j))
                if (seen.insert(i).second) next.push_back(i);
        frontier = std::move(next);
    }
    return {seen.begin(), seen.end()};
}

}  // namespace netflow
