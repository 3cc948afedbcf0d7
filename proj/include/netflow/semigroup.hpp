#pragma once

#include "netflow/graph.hpp"
#include "netflow/state.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace netflow {

/// Exact time literal for the exact evolution paths; decimals raise PrecisionError.
Rational parse_time(std::string_view text);

/// T(t)f(s) = B^n f(t+s-n) on n <= t+s < n+1. Valid for any operator on a graph
/// whose edges all take unit time to traverse; the caller picks B or B^C.
template <class T>
StepState<T> shift_evolve(const AdjacencyOperator& op, const StepState<T>& f, const Rational& t);

/// Unit-velocity semigroup. Requires an unscaled operator.
NetworkState evolve_unit(const AdjacencyOperator& op, const NetworkState& f, const Rational& t);

struct MultiplierSeed {
    Rational c;
    std::map<EdgeId, std::int64_t> ell;
};

/// Smallest c > 0 with c / c_j a natural number for every listed edge:
/// c = lcm(p_j) / gcd(q_j) for c_j = p_j / q_j in lowest terms.
MultiplierSeed common_multiplier(const VelocityProfile& vel, const std::vector<EdgeId>& edges,
                                 int max_bits = 62);

/// Subdivided graph G~ and the maps between states on G and G~. Edge e_j is cut
/// into ell_j sub-edges; sub-edge 1 holds the head (parameter 0) and keeps the
/// original id, the others get fresh ids above the largest original one.
struct SubdivisionPlan {
    struct Origin {
        EdgeId edge = 0;
        std::int64_t k = 1;  // 1-based position, 1 at the head
    };

    Rational c;
    std::map<EdgeId, std::int64_t> ell;
    std::map<EdgeId, std::vector<EdgeId>> sub_edges;
    std::unordered_map<EdgeId, Origin> origin;
    std::shared_ptr<const MetricGraph> original;
    std::shared_ptr<const MetricGraph> subdivided;
    /// Sub-edges inherit the velocity of their parent, which makes B~^C~ carry
    /// weight 1 at inserted vertices and B^C_ij at original ones.
    VelocityProfile sub_velocity;
    std::shared_ptr<const AdjacencyOperator> op;
    VelocityProfile velocity;

    bool is_identity() const;
    std::size_t subdivided_edge_count() const { return origin.size(); }
};

SubdivisionPlan subdivide(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel);

/// Restricts f_j to [(k-1)/ell_j, k/ell_j) and rescales it onto sub-edge k.
template <class T>
StepState<T> lift_state(const SubdivisionPlan& plan, const StepState<T>& f);

/// Concatenates sub-edge profiles back onto the original edges.
template <class T>
StepState<T> project_state(const SubdivisionPlan& plan, const StepState<T>& lifted);

/// T_C(t) f = S^{-1} T~(c t) S f with S = lift_state.
NetworkState evolve_rational(const SubdivisionPlan& plan, const NetworkState& f, const Rational& t);
NetworkState evolve_rational(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel,
                             const NetworkState& f, const Rational& t);

/// Edges reachable from `from` within `steps` applications of B (including `from`).
std::vector<EdgeId> reachable_edges(const AdjacencyOperator& op, const std::vector<EdgeId>& from, int steps);

extern template StepState<Rational> shift_evolve(const AdjacencyOperator&, const StepState<Rational>&,
                                                 const Rational&);
extern template StepState<double> shift_evolve(const AdjacencyOperator&, const StepState<double>&,
                                               const Rational&);
extern template StepState<Rational> lift_state(const SubdivisionPlan&, const StepState<Rational>&);
extern template StepState<double> lift_state(const SubdivisionPlan&, const StepState<double>&);
extern template StepState<Rational> project_state(const SubdivisionPlan&, const StepState<Rational>&);
extern template StepState<double> project_state(const SubdivisionPlan&, const StepState<double>&);

}  // namespace netflow
