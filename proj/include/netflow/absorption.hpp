#pragma once

#include "netflow/graph.hpp"
#include "netflow/semigroup.hpp"
#include "netflow/state.hpp"

#include <memory>
#include <optional>

namespace netflow {

/// Absorption rates q_j on each edge as a step profile. Positive values add
/// material, negative values remove it: the perturbed generator is A + M_q.
struct AbsorptionProfile {
    RealStepState q;

    /// sup over edges and pieces of |q_j|.
    double bound() const;
    /// q0 when every listed edge carries the same constant rate q0 on all of [0,1].
    std::optional<double> uniform_constant(const std::vector<EdgeId>& edges) const;
};

struct AbsorbingResult {
    RealStepState state;
    SampledState<double> samples;
    /// Bound on the dropped Dyson-Phillips terms k > order.
    double tail_bound = 0.0;
    /// Quadrature error of the kept terms; only available for a uniform constant rate.
    std::optional<double> quadrature_bound;
    /// Constant M with ||T_C(s)|| <= M for s <= t, used in the tail bound.
    double growth_bound = 1.0;
    int order = 0;
    int quad_steps = 0;
};

struct AbsorbingOptions {
    int order = 8;
    int quad_steps = 256;
    int grid = 64;
};

/// Truncated Dyson-Phillips series sum_{k<=K} S_k(t) f with S_0 = T and
/// S_{k+1}(t) f = int_0^t T(t-r) M_q S_k(r) f dr, each level integrated by the
/// composite midpoint rule on quad_steps panels of width h = t/quad_steps.
/// Second order when the breakpoints of q and the sample points are multiples
/// of h; first order near jumps otherwise. Unit-velocity version on any operator.
AbsorbingResult evolve_absorbing(const AdjacencyOperator& op, const AbsorptionProfile& q, const NetworkState& f,
                                 const Rational& t, const AbsorbingOptions& opts);

/// Rational velocities on a finite graph, run on the subdivided graph.
AbsorbingResult evolve_absorbing(const SubdivisionPlan& plan, const AbsorptionProfile& q, const NetworkState& f,
                                 const Rational& t, const AbsorbingOptions& opts);

/// Entrywise product (M_q v)(s) = q(s) v(s).
RealStepState multiply(const RealStepState& q, const RealStepState& v);

/// ||T_C(s)|| <= returned value for all 0 <= s <= t. Equal velocities give 1;
/// otherwise a per-edge bound is propagated through the vertex crossings that
/// fit into time t.
double growth_bound(const SubdivisionPlan& plan, const Rational& t);

}  // namespace netflow
