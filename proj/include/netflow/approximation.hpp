#pragma once

#include "netflow/graph.hpp"
#include "netflow/resolvent.hpp"
#include "netflow/state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace netflow {

enum class ApproxMethod { ContinuedFraction, DecimalTruncation };

ApproxMethod parse_approx_method(const std::string& text);
std::string to_string(ApproxMethod m);

/// n-th continued-fraction convergent (n = 1 gives the integer part) of the
/// exact value of x. Returns x itself once its expansion is exhausted.
Rational continued_fraction_convergent(const Rational& x, int n);

/// floor(x 10^n) / 10^n.
Rational decimal_truncation(const Rational& x, int n);

/// Level-n rational profile for the listed edges. Exact velocities go through
/// the same map, so a rational c_j becomes a fixed point once n is deep enough.
VelocityProfile rational_approx(const VelocityProfile& vel, const std::vector<EdgeId>& edges, int n,
                                ApproxMethod method);

struct ApproximationSchedule {
    std::vector<int> levels;
    ApproxMethod method = ApproxMethod::ContinuedFraction;
    std::vector<VelocityProfile> profiles;
};

/// Six convergent levels starting where the coarsest approximants of typical
/// velocities already sit inside the admissible band.
std::vector<int> default_levels(ApproxMethod method);

/// Builds the per-level profiles. Levels must increase; every approximant has
/// to lie in (c_min / 2, 2 c_max), otherwise ArgumentError names the level.
ApproximationSchedule make_schedule(const MetricGraph& g, const VelocityProfile& vel, std::vector<int> levels,
                                    ApproxMethod method);

/// T(t) f at arbitrary (also irrational) velocities by backward characteristics
/// in floating point. Breakpoints are the exact values of the computed doubles.
RealStepState trace_state(const MetricGraph& g, const VelocityProfile& vel, const NetworkState& f, double t);

struct ConvergenceRow {
    int level = 0;
    VelocityProfile velocities;
    std::size_t subdivided_edges = 0;
    /// max_j |c_j - c_j^(n)|
    double velocity_error = 0.0;
    /// |pair(T_n(t) f - T(t) f, g)| per test function
    std::vector<double> weak_errors;
    /// sup_s ||T_n(t) f (s) - T(t) f (s)||_1
    std::optional<double> semigroup_error;
    /// sup-sample ||R(lambda, A_n) f - R(lambda, A_C) f||_1
    std::optional<double> resolvent_error;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    /// int_0^1 max_j |g_j(s)| ds, the dual norm in the weak errors' Hoelder bound.
    std::vector<double> test_norms;
    /// True when the reference is the exact evolution at the given velocities.
    bool exact_reference = false;
    /// Least-squares slope L of error ~ L * velocity_error and the RMS residual.
    std::optional<double> fit_slope;
    std::optional<double> fit_residual;
};

ConvergenceTable semigroup_convergence(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel,
                                       const NetworkState& f, const Rational& t,
                                       const std::vector<TestFunction>& gs, const ApproximationSchedule& schedule);

ConvergenceTable resolvent_convergence(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel,
                                       Complex lambda, const NetworkState& f, const ApproximationSchedule& schedule,
                                       const ResolventOptions& opts = {});

/// Row-wise check weak_error <= semigroup_error * test_norm (with slack for rounding).
bool hoelder_holds(const ConvergenceTable& table, double slack = 1e-12);

}  // namespace netflow
