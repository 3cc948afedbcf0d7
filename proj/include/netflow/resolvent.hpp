#pragma once

#include "netflow/graph.hpp"
#include "netflow/semigroup.hpp"
#include "netflow/state.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <optional>

namespace netflow {

using Complex = std::complex<double>;

/// e^z - 1 without cancellation for small |z|.
Complex expm1(const Complex& z);

/// E_lambda(s) = diag(e^{(lambda/c_j) s}) and B^C_lambda = E_lambda(-1) B^C.
class ExpScaling {
public:
    ExpScaling(Complex lambda, VelocityProfile vel);

    Complex lambda() const { return lambda_; }
    const VelocityProfile& velocities() const { return vel_; }
    Complex entry(EdgeId j, double s) const;
    /// B^C_lambda v for the given velocity-scaled operator.
    SparseVector<Complex> apply_b_lambda(const AdjacencyOperator& scaled, const SparseVector<Complex>& v) const;

private:
    Complex lambda_;
    VelocityProfile vel_;
};

struct ResolventOptions {
    double tol = 1e-12;
    int grid = 64;
    /// Cap on series terms before TruncationError.
    int max_terms = 1000000;
};

struct ResolventResult {
    SampledState<Complex> samples;
    /// Series terms kept and the a priori bound on the rest.
    int k_used = 0;
    double tail_bound = 0.0;
    /// General formula only.
    std::optional<int> neumann_terms;
    /// l1-induced norm (max absolute column sum) of B^C_lambda.
    std::optional<double> norm_b_lambda;
    /// Induced norm for ||v||_C = sum_j c_j |v_j|, where B^C_lambda is a strict
    /// contraction whenever Re(lambda) > 0.
    std::optional<double> norm_b_lambda_weighted;
};

/// Unit velocities: R f(s) = e^{-lambda(1-s)} sum_k e^{-lambda k} B^{k+1} F + int_s^1 e^{lambda(s-t)} f(t) dt
/// with F = int_0^1 e^{-lambda t} f(t) dt. Works on lazy graphs.
ResolventResult resolvent_unit(const AdjacencyOperator& op, Complex lambda, const NetworkState& f,
                               const ResolventOptions& opts = {});

/// Arbitrary positive velocities on a finite graph:
/// R f = R_lambda f + E_lambda(.) (1 - B^C_lambda)^{-1} B^C_lambda (R_lambda f)(0).
ResolventResult resolvent_general(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel, Complex lambda,
                                  const NetworkState& f, const ResolventOptions& opts = {});

/// Exact evolutions seen through what the Laplace oracle needs.
struct Evolution {
    /// T(dt) applied to a state on the original graph.
    std::function<RealStepState(const RealStepState&, const Rational&)> advance;
    /// T(t) f evaluated at one point.
    std::function<SparseVector<double>(const Rational& s, const Rational& t)> point;
    /// Times in (0, t_max) at which t -> T(t) f (s) may jump.
    std::function<std::vector<Rational>(const Rational& s, const Rational& t_max)> jump_times;
    /// Nondecreasing bound on sup_{u <= t} ||T(u)|| in the sup norm.
    std::function<double(const Rational& t)> growth = [](const Rational&) { return 1.0; };
};

Evolution unit_evolution(const AdjacencyOperator& op, const NetworkState& f);
Evolution rational_evolution(std::shared_ptr<const SubdivisionPlan> plan, const NetworkState& f);

struct LaplaceOptions {
    Rational t_max{12};
    int steps = 4096;
    int grid = 64;
};

struct LaplaceResult {
    SampledState<Complex> samples;
    double tail_bound = 0.0;
    double quadrature_bound = 0.0;
};

/// Composite trapezoid of int_0^T e^{-lambda t} T(t) f dt at each sample point.
/// The panel nodes are k T/steps plus the jump times of T(t) f (s), so every
/// sub-panel has a constant state value and the quadrature bound is rigorous.
LaplaceResult laplace_oracle(const Evolution& ev, Complex lambda, const NetworkState& f,
                             const LaplaceOptions& opts = {});

struct IdentityReport {
    /// max |lambda R_j - c_j D R_j - f_j| over stencils not touching a breakpoint of f
    double interior_residual = 0.0;
    /// same over the stencils that do
    double breakpoint_residual = 0.0;
    int excluded_samples = 0;
    /// ||R(1) - B^C R(0)||_1
    double trace_residual = 0.0;
};

/// Central differences with h = 1/M on the sampled resolvent.
IdentityReport resolvent_identity_check(const SampledState<Complex>& rf, const NetworkState& f, Complex lambda,
                                        const AdjacencyOperator& op);

/// Max over samples of ||a(s) - b(s)||_1.
double sample_distance(const SampledState<Complex>& a, const SampledState<Complex>& b);
double sup_norm_complex(const SampledState<Complex>& a);

}  // namespace netflow
