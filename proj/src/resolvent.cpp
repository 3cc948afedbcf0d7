#include "netflow/resolvent.hpp"

#include "netflow/absorption.hpp"
#include "netflow/errors.hpp"
#include "netflow/parallel.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>
#include <cmath>
#include <limits>
#include <map>

namespace netflow {

namespace {

std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

template <class Fn>
SparseVector<Complex> map_indexed(const SparseVector<Complex>& v, Fn fn) {
    std::vector<std::pair<EdgeId, Complex>> out;
    for (const auto& [id, x] : v) out.emplace_back(id, fn(id, x));
    return SparseVector<Complex>::from_entries(std::move(out));
}

}  // namespace

Complex expm1(const Complex& z) {
    const double x = z.real(), y = z.imag();
    const double s = std::sin(y / 2);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

ExpScaling::ExpScaling(Complex lambda, VelocityProfile vel) : lambda_(lambda), vel_(std::move(vel)) {}

Complex ExpScaling::entry(EdgeId j, double s) const { return std::exp(lambda_ / vel_.at(j).value * s); }

SparseVector<Complex> ExpScaling::apply_b_lambda(const AdjacencyOperator& scaled, const SparseVector<Complex>& v) const {
    return map_indexed(scaled.apply(v), [&](EdgeId i, const Complex& x) { return x * entry(i, -1.0); });
}

namespace {

void require_positive_real_part(Complex lambda) {
    if (!(lambda.real() > 0.0))
        throw DomainError("resolvent needs Re(lambda) > 0, got Re(lambda) = " + format_double(lambda.real()));
}

/// int_s^1 e^{mu (s - t)} f_j(t) / c dt for every edge j of f, mu = lambda / c_j.
class LocalIntegral {
public:
    LocalIntegral(const NetworkState& f, Complex lambda, const std::function<double(EdgeId)>& velocity)
        : lambda_(lambda) {
        for (const auto& b : f.breakpoints()) bp_.push_back(to_double(b));
        for (const auto& v : f.values()) vals_.push_back(convert<double>(v));
        for (EdgeId id : f.support()) c_[id] = velocity(id);
    }

    SparseVector<Complex> at(double s) const {
        std::map<EdgeId, Complex> acc;
        for (std::size_t m = 0; m < vals_.size(); ++m) {
            if (!(bp_[m + 1] > s)) continue;
            const double a = std::max(s, bp_[m]);
            const double len = bp_[m + 1] - a;
            for (const auto& [id, x] : vals_[m]) {
                const Complex mu = lambda_ / c_.at(id);
                // (x / c) * e^{mu (s - a)} (1 - e^{-mu len}) / mu  =  -x e^{mu (s-a)} expm1(-mu len) / lambda
                acc[id] += -x * std::exp(mu * (s - a)) * expm1(-mu * len) / lambda_;
            }
        }
        std::vector<std::pair<EdgeId, Complex>> entries(acc.begin(), acc.end());
        return SparseVector<Complex>::from_entries(std::move(entries));
    }

private:
    Complex lambda_;
    std::vector<double> bp_;
    std::vector<SparseVector<double>> vals_;
    std::map<EdgeId, double> c_;
};

SampledState<Complex> zero_samples(int grid) {
    SampledState<Complex> out;
    out.grid = grid;
    out.samples.assign(grid + 1, {});
    return out;
}

}  // namespace

ResolventResult resolvent_unit(const AdjacencyOperator& op, Complex lambda, const NetworkState& f,
                               const ResolventOptions& opts) {
    require_positive_real_part(lambda);
    if (op.scaled()) throw WrongOperatorError("resolvent_unit needs the unscaled operator B");
    if (opts.grid < 1) throw ArgumentError("sample grid M must be >= 1");
    if (!(opts.tol > 0.0)) throw ArgumentError("tolerance must be positive");

    ResolventResult res;
    const double fnorm = to_double(sup_norm(f));
    if (fnorm == 0.0) {
        res.samples = zero_samples(opts.grid);
        return res;
    }
    const double re = lambda.real();
    const double ratio = fnorm / -std::expm1(-re);
    // smallest K with e^{-Re(lambda) K} / (1 - e^{-Re(lambda)}) ||f|| <= tol
    const double needed = std::max(1.0, std::ceil(std::log(ratio / opts.tol) / re));
    if (needed > opts.max_terms) {
        const double achieved = std::exp(-re * opts.max_terms) * ratio;
        throw TruncationError("resolvent series needs " + format_double(needed) + " terms, cap is " +
                                  std::to_string(opts.max_terms),
                              achieved);
    }
    res.k_used = static_cast<int>(needed);
    res.tail_bound = std::exp(-re * res.k_used) * ratio;

    LocalIntegral local(f, lambda, [](EdgeId) { return 1.0; });
    const SparseVector<Complex> F = local.at(0.0);
    // G = sum_{k < K} e^{-lambda k} B^{k+1} F
    const Complex step = std::exp(-lambda);
    SparseVector<Complex> term = op.apply(F), total = term;
    for (int k = 1; k < res.k_used; ++k) {
        term = op.apply(term);
        term *= step;
        total += term;
    }
    res.samples.grid = opts.grid;
    res.samples.samples.resize(opts.grid + 1);
    parallel_for(static_cast<std::size_t>(opts.grid) + 1, [&](std::size_t m) {
        const double s = static_cast<double>(m) / opts.grid;
        SparseVector<Complex> v = local.at(s);
        v.axpy(std::exp(-lambda * (1.0 - s)), total);
        res.samples.samples[m] = std::move(v);
    });
    return res;
}

ResolventResult resolvent_general(std::shared_ptr<const MetricGraph> g, const VelocityProfile& vel, Complex lambda,
                                  const NetworkState& f, const ResolventOptions& opts) {
    require_positive_real_part(lambda);
    if (!g || !g->is_finite()) throw ArgumentError("resolvent_general needs a finite graph");
    if (opts.grid < 1) throw ArgumentError("sample grid M must be >= 1");
    if (!(opts.tol > 0.0)) throw ArgumentError("tolerance must be positive");
    const AdjacencyOperator scaled = build_adjacency(g, vel);
    const ExpScaling scaling(lambda, vel);
    const auto ids = g->edge_ids();

    ResolventResult res;
    // operator norms of B^C_lambda
    double plain = 0.0, weighted = 0.0;
    for (EdgeId j : ids) {
        double cp = 0.0, cw = 0.0;
        for (const auto& [i, w] : scaled.column_real(j)) {
            const double damp = std::exp(-lambda.real() / vel.at(i).value);
            cp += damp * std::abs(w);
            cw += damp * std::abs(w) * vel.at(i).value / vel.at(j).value;
        }
        plain = std::max(plain, cp);
        weighted = std::max(weighted, cw);
    }
    res.norm_b_lambda = plain;
    res.norm_b_lambda_weighted = weighted;
    if (!(weighted < 1.0))
        throw ContractionViolationError("B^C_lambda has weighted norm " + format_double(weighted) + " >= 1");

    LocalIntegral local(f, lambda, [&](EdgeId id) { return vel.at(id).value; });
    const SparseVector<Complex> x0 = local.at(0.0);

    double c_min = std::numeric_limits<double>::infinity();
    for (EdgeId id : ids) c_min = std::min(c_min, vel.at(id).value);
    const double e_max = std::exp(lambda.real() / c_min);
    auto weighted_norm = [&](const SparseVector<Complex>& v) {
        double n = 0.0;
        for (const auto& [id, x] : v) n += vel.at(id).value * std::abs(x);
        return n;
    };

    // sum_{n >= 0} (B^C_lambda)^n y with y = B^C_lambda x0
    SparseVector<Complex> term = scaling.apply_b_lambda(scaled, x0), total = term;
    int terms = 1;
    auto remainder = [&](const SparseVector<Complex>& t) {
        return e_max * weighted * weighted_norm(t) / ((1.0 - weighted) * c_min);
    };
    while (remainder(term) > opts.tol) {
        if (terms >= opts.max_terms)
            throw TruncationError("Neumann series did not reach tolerance within " + std::to_string(opts.max_terms) +
                                      " terms",
                                  remainder(term));
        term = scaling.apply_b_lambda(scaled, term);
        total += term;
        ++terms;
    }
    res.neumann_terms = terms;
    res.k_used = terms;
    res.tail_bound = remainder(term);

    res.samples.grid = opts.grid;
    res.samples.samples.resize(opts.grid + 1);
    parallel_for(static_cast<std::size_t>(opts.grid) + 1, [&](std::size_t m) {
        const double s = static_cast<double>(m) / opts.grid;
        SparseVector<Complex> v = local.at(s);
        v += map_indexed(total, [&](EdgeId i, const Complex& x) { return scaling.entry(i, s) * x; });
        res.samples.samples[m] = std::move(v);
    });
    return res;
}

// ---------------------------------------------------------------------------
// Laplace oracle

Evolution unit_evolution(const AdjacencyOperator& op, const NetworkState& f) {
    Evolution ev;
    const AdjacencyOperator* p = &op;
    const RealStepState fd = convert_state<double>(f);
    ev.advance = [p](const RealStepState& s, const Rational& dt) { return shift_evolve(*p, s, dt); };
    ev.point = [p, fd](const Rational& s, const Rational& t) { return shift_evolve(*p, fd, t).at(s); };
    std::vector<Rational> bps = f.breakpoints();
    ev.jump_times = [bps](const Rational& s, const Rational& t_max) {
        std::vector<Rational> out;
        for (const auto& b : bps)
            for (Rational t = b - s; t < t_max; t += 1)
                if (sgn(t) > 0) out.push_back(t);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    return ev;
}

Evolution rational_evolution(std::shared_ptr<const SubdivisionPlan> plan, const NetworkState& f) {
    Evolution ev;
    const RealStepState lifted = lift_state(*plan, convert_state<double>(f));
    ev.advance = [plan](const RealStepState& s, const Rational& dt) {
        return project_state(*plan, shift_evolve(*plan->op, lift_state(*plan, s), plan->c * dt));
    };
    ev.point = [plan, lifted](const Rational& s, const Rational& t) {
        return project_state(*plan, shift_evolve(*plan->op, lifted, plan->c * t)).at(s);
    };
    std::vector<Rational> bps = lifted.breakpoints();
    ev.jump_times = [plan, bps](const Rational& s, const Rational& t_max) {
        std::vector<Rational> out;
        const Rational tau_max = plan->c * t_max;
        std::set<std::int64_t> ells;
        for (const auto& [id, l] : plan->ell) ells.insert(l);
        for (std::int64_t l : ells) {
            std::vector<Rational> sigmas{frac(s * l)};
            if (sgn(sigmas[0]) == 0) sigmas.push_back(Rational(1));
            for (const auto& sigma : sigmas)
                for (const auto& b : bps)
                    for (Rational tau = b - sigma; tau < tau_max; tau += 1)
                        if (sgn(tau) > 0) out.push_back(tau / plan->c);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    ev.growth = [plan](const Rational& t) { return growth_bound(*plan, t); };
    return ev;
}

namespace {

/// int_T^inf e^{-re t} growth(t) dt, bounding growth by its value at the right end of unit blocks.
double laplace_tail(const Evolution& ev, double re, const Rational& t_max) {
    const double T = to_double(t_max);
    double total = 0.0;
    for (int n = 0; n < 2000; ++n) {
        const double block = std::exp(-re * (T + n)) * -std::expm1(-re) / re;
        const double term = block * ev.growth(t_max + n + 1);
        total += term;
        if (term <= 1e-17 * total && n >= 4) return total;
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace

LaplaceResult laplace_oracle(const Evolution& ev, Complex lambda, const NetworkState& f, const LaplaceOptions& opts) {
    require_positive_real_part(lambda);
    if (opts.steps < 1) throw ArgumentError("Laplace oracle needs at least one panel");
    if (opts.grid < 1) throw ArgumentError("sample grid M must be >= 1");
    if (sgn(opts.t_max) <= 0) throw ArgumentError("T_max must be positive");

    LaplaceResult res;
    const double fnorm = to_double(sup_norm(f));
    res.tail_bound = laplace_tail(ev, lambda.real(), opts.t_max) * fnorm;
    res.samples = zero_samples(opts.grid);
    if (fnorm == 0.0) return res;

    // states at the panel midpoints, where no jump can sit by construction of the nodes
    const Rational dt = opts.t_max / opts.steps;
    std::vector<RealStepState> mid(opts.steps);
    mid[0] = ev.advance(convert_state<double>(f), dt / 2);
    for (int k = 1; k < opts.steps; ++k) mid[k] = ev.advance(mid[k - 1], dt);

    const double lam2 = std::norm(lambda);
    std::vector<double> quad(opts.grid + 1, 0.0);
    parallel_for(static_cast<std::size_t>(opts.grid) + 1, [&](std::size_t m) {
        const Rational s = ratio(static_cast<long>(m), opts.grid);
        const auto jumps = ev.jump_times(s, opts.t_max);
        std::vector<std::pair<EdgeId, Complex>> acc;
        std::map<EdgeId, Complex> sum;
        double err = 0.0;
        std::size_t next_jump = 0;
        for (int k = 0; k < opts.steps; ++k) {
            const Rational lo = dt * k, hi = dt * (k + 1);
            std::vector<Rational> nodes{lo};
            while (next_jump < jumps.size() && jumps[next_jump] <= lo) ++next_jump;
            for (std::size_t j = next_jump; j < jumps.size() && jumps[j] < hi; ++j) nodes.push_back(jumps[j]);
            nodes.push_back(hi);
            for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
                const SparseVector<double> v =
                    nodes.size() == 2 ? mid[k].at(s) : ev.point(s, (nodes[p] + nodes[p + 1]) / 2);
                if (v.empty()) continue;
                const double a = to_double(nodes[p]), b = to_double(nodes[p + 1]);
                const Complex w = (b - a) / 2 * (std::exp(-lambda * a) + std::exp(-lambda * b));
                for (const auto& [id, x] : v) sum[id] += w * x;
                err += (b - a) * (b - a) * (b - a) / 12.0 * lam2 * std::exp(-lambda.real() * a) * norm1(v);
            }
        }
        for (const auto& [id, x] : sum) acc.emplace_back(id, x);
        res.samples.samples[m] = SparseVector<Complex>::from_entries(std::move(acc));
        quad[m] = err;
    });
    res.quadrature_bound = *std::max_element(quad.begin(), quad.end());
    return res;
}

// ---------------------------------------------------------------------------

IdentityReport resolvent_identity_check(const SampledState<Complex>& rf, const NetworkState& f, Complex lambda,
                                        const AdjacencyOperator& op) {
    IdentityReport rep;
    const int M = rf.grid;
    const double h = 1.0 / M;
    auto velocity = [&](EdgeId id) { return op.scaled() ? op.scaling()->at(id).value : 1.0; };
    const auto& bps = f.breakpoints();
    for (int m = 1; m < M; ++m) {
        const Rational lo = ratio(m - 1, M), hi = ratio(m + 1, M);
        bool touches = false;
        for (std::size_t k = 1; k + 1 < bps.size(); ++k)
            if (bps[k] >= lo && bps[k] <= hi) touches = true;
        const auto fs = convert<double>(f.at(ratio(m, M)));
        SparseVector<Complex> diff = rf.samples[m + 1] - rf.samples[m - 1];
        std::map<EdgeId, Complex> r;
        for (const auto& [id, x] : rf.samples[m]) r[id] += lambda * x;
        for (const auto& [id, x] : diff) r[id] -= velocity(id) * x / (2 * h);
        for (const auto& [id, x] : fs) r[id] -= x;
        double worst = 0.0;
        for (const auto& [id, x] : r) worst = std::max(worst, std::abs(x));
        if (touches) {
            ++rep.excluded_samples;
            rep.breakpoint_residual = std::max(rep.breakpoint_residual, worst);
        } else {
            rep.interior_residual = std::max(rep.interior_residual, worst);
        }
    }
    rep.trace_residual = norm1(rf.samples[M] - op.apply(rf.samples[0]));
    return rep;
}

double sample_distance(const SampledState<Complex>& a, const SampledState<Complex>& b) {
    if (a.grid != b.grid) throw ArgumentError("sample grids differ");
    double d = 0.0;
    for (std::size_t m = 0; m < a.samples.size(); ++m) d = std::max(d, norm1(a.samples[m] - b.samples[m]));
    return d;
}

double sup_norm_complex(const SampledState<Complex>& a) { return sup_norm(a); }

}  // namespace netflow
