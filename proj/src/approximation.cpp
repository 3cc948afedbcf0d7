#include "netflow/approximation.hpp"

#include "netflow/errors.hpp"
#include "netflow/parallel.hpp"
#include "netflow/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace netflow {

ApproxMethod parse_approx_method(const std::string& text) {
    if (text == "cf") return ApproxMethod::ContinuedFraction;
    if (text == "dec") return ApproxMethod::DecimalTruncation;
    throw ArgumentError("unknown approximation method '" + text + "' (expected cf or dec)");
}

std::string to_string(ApproxMethod m) { return m == ApproxMethod::ContinuedFraction ? "cf" : "dec"; }

Rational continued_fraction_convergent(const Rational& x, int n) {
    if (n < 1) throw ArgumentError("convergent index must be >= 1");
    Rational rest = x;
    rest.canonicalize();
    Integer h1(1), h2(0), k1(0), k2(1);
    for (int i = 0; i < n; ++i) {
        const Integer a = floor(rest);
        const Integer h = a * h1 + h2, k = a * k1 + k2;
        if (!fits_int64(h) || !fits_int64(k))
            throw OverflowError("convergent " + std::to_string(i + 1) + " of " + to_string(x) +
                                " does not fit in 64-bit integers");
        h2 = h1, h1 = h, k2 = k1, k1 = k;
        rest -= Rational(a);
        if (sgn(rest) == 0) break;
        rest = 1 / rest;
    }
    return ratio(h1, k1);
}

Rational decimal_truncation(const Rational& x, int n) {
    if (n < 0) throw ArgumentError("decimal digits must be >= 0");
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(n));
    return ratio(floor(x * Rational(scale)), scale);
}

namespace {

Rational exact_of(const Velocity& v) { return v.exact ? *v.exact : from_double(v.value); }

}  // namespace

VelocityProfile rational_approx(const VelocityProfile& vel, const std::vector<EdgeId>& edges, int n,
                                ApproxMethod method) {
    VelocityProfile out;
    for (EdgeId j : edges) {
        const Rational x = exact_of(vel.at(j));
        const Rational r = method == ApproxMethod::ContinuedFraction ? continued_fraction_convergent(x, n)
                                                                     : decimal_truncation(x, n);
        if (sgn(r) <= 0)
            throw ArgumentError("level " + std::to_string(n) + " approximates c_" + std::to_string(j) + " by " +
                                to_string(r) + ", which is not a velocity; start the schedule at a finer level");
        out.set(j, Velocity::exact_value(r));
    }
    return out;
}

std::vector<int> default_levels(ApproxMethod method) {
    if (method == ApproxMethod::ContinuedFraction) return {3, 4, 5, 6, 7, 8};
    return {1, 2, 3};
}

ApproximationSchedule make_schedule(const MetricGraph& g, const VelocityProfile& vel, std::vector<int> levels,
                                    ApproxMethod method) {
    if (!g.is_finite()) throw ArgumentError("approximation needs a finite graph");
    if (levels.empty()) throw ArgumentError("approximation schedule needs at least one level");
    for (std::size_t k = 1; k < levels.size(); ++k)
        if (levels[k] <= levels[k - 1]) throw ArgumentError("schedule levels must be strictly increasing");
    const auto ids = g.edge_ids();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (EdgeId j : ids) {
        lo = std::min(lo, vel.at(j).value);
        hi = std::max(hi, vel.at(j).value);
    }
    ApproximationSchedule s;
    s.levels = std::move(levels);
    s.method = method;
    for (int n : s.levels) {
        VelocityProfile p = rational_approx(vel, ids, n, method);
        for (EdgeId j : ids) {
            const double c = p.at(j).value;
            if (!(c > lo / 2 && c < 2 * hi))
                throw ArgumentError("level " + std::to_string(n) + " approximates c_" + std::to_string(j) + " by " +
                                    to_string(*p.at(j).exact) + ", outside the band (c_min/2, 2 c_max); start the "
                                    "schedule at a finer level");
        }
        s.profiles.push_back(std::move(p));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Characteristic tracing

namespace {

/// Backward characteristics. A branch on edge i carries the affine "virtual
/// position" v(s) = a + b s: the source point if edge i were unbounded. Past
/// the tail (v >= 1) it continues on every predecessor k with
/// v' = (v - 1) c_k / c_i and weight (c_k / c_i) w_ik.
class Tracer {
public:
    Tracer(const MetricGraph& g, const VelocityProfile& vel, const NetworkState& f) : f_(convert_state<double>(f)) {
        for (EdgeId k : g.edge_ids()) {
            c_[k] = vel.at(k).value;
            for (const auto& [i, w] : g.column(k)) preds_[i].push_back({k, to_double(w)});
        }
        for (std::size_t m = 1; m + 1 < f.breakpoints().size(); ++m) bps_.push_back(to_double(f.breakpoints()[m]));
    }

    void breakpoints(EdgeId i, double lo, double hi, double a, double b, std::vector<double>& out, int depth) const {
        if (!(lo < hi)) return;
        guard(depth);
        const double cross = (1.0 - a) / b;
        const double mid = std::min(hi, cross);
        if (lo < mid) {
            out.push_back(mid);
            for (double bp : bps_) {
                const double s = (bp - a) / b;
                if (s > lo && s < mid) out.push_back(s);
            }
        }
        const double from = std::max(lo, cross);
        if (from < hi)
            for (const auto& [k, w] : preds(i)) {
                const double r = c_.at(k) / c_.at(i);
                breakpoints(k, from, hi, (a - 1.0) * r, b * r, out, depth + 1);
            }
    }

    double value(EdgeId i, double v, int depth) const {
        guard(depth);
        if (v < 1.0) return f_.at(v).at(i);
        double total = 0.0;
        for (const auto& [k, w] : preds(i)) {
            const double r = c_.at(k) / c_.at(i);
            total += r * w * value(k, (v - 1.0) * r, depth + 1);
        }
        return total;
    }

    double velocity(EdgeId i) const { return c_.at(i); }

private:
    using Preds = std::vector<std::pair<EdgeId, double>>;

    const Preds& preds(EdgeId i) const {
        static const Preds none;
        auto it = preds_.find(i);
        return it == preds_.end() ? none : it->second;
    }

    static void guard(int depth) {
        if (depth > 100000) throw Error("characteristic tracing exceeded its depth limit");
    }

    RealStepState f_;
    std::map<EdgeId, double> c_;
    std::map<EdgeId, Preds> preds_;
    std::vector<double> bps_;
};

}  // namespace

RealStepState trace_state(const MetricGraph& g, const VelocityProfile& vel, const NetworkState& f, double t) {
    if (!g.is_finite()) throw ArgumentError("characteristic tracing needs a finite graph");
    if (!(t >= 0.0)) throw DomainError("evolution time must be nonnegative");
    Tracer tr(g, vel, f);
    const auto ids = g.edge_ids();
    std::vector<double> cuts;
    for (EdgeId j : ids) tr.breakpoints(j, 0.0, 1.0, tr.velocity(j) * t, 1.0, cuts, 0);
    std::vector<Rational> grid{Rational(0), Rational(1)};
    for (double s : cuts)
        if (s > 0.0 && s < 1.0) grid.push_back(from_double(s));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<SparseVector<double>> vals;
    vals.reserve(grid.size() - 1);
    for (std::size_t p = 0; p + 1 < grid.size(); ++p) {
        const double s = to_double((grid[p] + grid[p + 1]) / 2);
        std::vector<std::pair<EdgeId, double>> entries;
        for (EdgeId j : ids) {
            const double x = tr.value(j, s + tr.velocity(j) * t, 0);
            if (x != 0.0) entries.emplace_back(j, x);
        }
        vals.push_back(SparseVector<double>::from_entries(std::move(entries)));
    }
    return RealStepState(std::move(grid), std::move(vals));
}

// ---------------------------------------------------------------------------
// Convergence studies

namespace {

double velocity_error(const VelocityProfile& vel, const VelocityProfile& approx, const std::vector<EdgeId>& ids) {
    double e = 0.0;
    for (EdgeId j : ids) e = std::max(e, std::abs(vel.at(j).value - to_double(*approx.at(j).exact)));
    return e;
}

/// Floating evolution through the subdivided graph; shared by the levels and
/// the exact reference so identical profiles give bitwise identical states.
RealStepState evolve_double(const SubdivisionPlan& plan, const RealStepState& f, const Rational& t) {
    return project_state(plan, shift_evolve(*plan.op, lift_state(plan, f), plan.c * t));
}

double dual_norm(const TestFunction& g) {
    double total = 0.0;
    for (std::size_t m = 0; m < g.pieces(); ++m) {
        double top = 0.0;
        for (const auto& [id, x] : g.values()[m]) top = std::max(top, std::abs(to_double(x)));
        total += to_double(g.breakpoints()[m + 1] - g.breakpoints()[m]) * top;
    }
    return total;
}

void require_finite(const std::shared_ptr<const MetricGraph>& g) {
    if (!g || !g->is_finite()) throw ArgumentError("convergence studies need a finite graph");
}

}  // namespace

ConvergenceTable semigroup_convergence(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel,
                                       const NetworkState& f, const Rational& t,
                                       const std::vector<TestFunction>& gs, const ApproximationSchedule& schedule) {
    require_finite(g);
    if (sgn(t) < 0) throw DomainError("evolution time must be nonnegative");
    const auto ids = g->edge_ids();
    const RealStepState fd = convert_state<double>(f);

    ConvergenceTable table;
    table.exact_reference = vel.all_exact();
    for (const auto& gf : gs) table.test_norms.push_back(dual_norm(gf));
    const RealStepState ref =
        table.exact_reference ? evolve_double(subdivide(g, vel), fd, t) : trace_state(*g, vel, f, to_double(t));

    table.rows.resize(schedule.levels.size());
    parallel_for(schedule.levels.size(), [&](std::size_t k) {
        const auto& profile = schedule.profiles[k];
        const SubdivisionPlan plan = subdivide(g, profile);
        const RealStepState diff = evolve_double(plan, fd, t) - ref;
        ConvergenceRow& row = table.rows[k];
        row.level = schedule.levels[k];
        row.velocities = profile;
        row.subdivided_edges = plan.subdivided_edge_count();
        row.velocity_error = velocity_error(vel, profile, ids);
        row.semigroup_error = sup_norm(diff);
        for (const auto& gf : gs) row.weak_errors.push_back(std::abs(pair(diff, gf)));
    });
    return table;
}

ConvergenceTable resolvent_convergence(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel,
                                       Complex lambda, const NetworkState& f, const ApproximationSchedule& schedule,
                                       const ResolventOptions& opts) {
    require_finite(g);
    const auto ids = g->edge_ids();
    ConvergenceTable table;
    table.exact_reference = vel.all_exact();
    const auto ref = resolvent_general(g, vel, lambda, f, opts).samples;

    table.rows.resize(schedule.levels.size());
    parallel_for(schedule.levels.size(), [&](std::size_t k) {
        const auto& profile = schedule.profiles[k];
        ConvergenceRow& row = table.rows[k];
        row.level = schedule.levels[k];
        row.velocities = profile;
        row.velocity_error = velocity_error(vel, profile, ids);
        row.resolvent_error = sample_distance(resolvent_general(g, profile, lambda, f, opts).samples, ref);
    });

    double sxx = 0.0, sxy = 0.0;
    for (const auto& row : table.rows) {
        sxx += row.velocity_error * row.velocity_error;
        sxy += row.velocity_error * *row.resolvent_error;
    }
    if (sxx > 0.0) {
        const double L = sxy / sxx;
        double ss = 0.0;
        for (const auto& row : table.rows) {
            const double r = *row.resolvent_error - L * row.velocity_error;
            ss += r * r;
        }
        table.fit_slope = L;
        table.fit_residual = std::sqrt(ss / static_cast<double>(table.rows.size()));
    }
    return table;
}

bool hoelder_holds(const ConvergenceTable& table, double slack) {
    for (const auto& row : table.rows) {
        if (!row.semigroup_error) continue;
        for (std::size_t k = 0; k < row.weak_errors.size(); ++k)
            if (row.weak_errors[k] > *row.semigroup_error * table.test_norms[k] + slack) return false;
    }
    return true;
}

}  // namespace netflow
