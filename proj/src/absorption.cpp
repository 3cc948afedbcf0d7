#include "netflow/absorption.hpp"

#include "netflow/errors.hpp"

#include <cmath>
#include <limits>
#include <algorithm>
#include <iterator>
#include <map>

namespace netflow {

double AbsorptionProfile::bound() const {
    double b = 0.0;
    for (const auto& v : q.values())
        for (const auto& [id, x] : v) b = std::max(b, std::abs(x));
    return b;
}

std::optional<double> AbsorptionProfile::uniform_constant(const std::vector<EdgeId>& edges) const {
    if (q.pieces() != 1) return std::nullopt;
    const auto& v = q.values().front();
    if (v.empty()) return 0.0;
    if (v.size() != edges.size()) return std::nullopt;
    const double q0 = v.begin()->second;
    std::size_t k = 0;
    for (const auto& [id, x] : v) {
        if (id != edges[k++] || x != q0) return std::nullopt;
    }
    return q0;
}

RealStepState multiply(const RealStepState& q, const RealStepState& v) {
    return combine(q, v, [](const SparseVector<double>& a, const SparseVector<double>& b) {
        std::vector<std::pair<EdgeId, double>> out;
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            if (ia->first < ib->first)
                ++ia;
            else if (ib->first < ia->first)
                ++ib;
            else {
                out.emplace_back(ia->first, ia->second * ib->second);
                ++ia;
                ++ib;
            }
        }
        return SparseVector<double>::from_entries(std::move(out));
    });
}

double growth_bound(const SubdivisionPlan& plan, const Rational& t) {
    const auto& entries = plan.velocity.entries();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [id, v] : entries) {
        lo = std::min(lo, v.value);
        hi = std::max(hi, v.value);
    }
    if (entries.empty() || lo == hi) return 1.0;
    // |u_i| <= rho_i ||f|| pointwise; each crossing maps rho to max(1, B^C rho).
    AdjacencyOperator scaled(plan.original, plan.velocity);
    const auto ids = plan.original->edge_ids();
    std::map<EdgeId, double> rho;
    for (EdgeId id : ids) rho[id] = 1.0;
    const double crossings = std::ceil(to_double(t) * hi) + 1.0;
    for (int n = 0; n < crossings; ++n) {
        std::map<EdgeId, double> next;
        for (EdgeId id : ids) next[id] = 1.0;
        std::map<EdgeId, double> acc;
        for (EdgeId j : ids)
            for (const auto& [i, w] : scaled.column_real(j)) acc[i] += w * rho[j];
        for (const auto& [i, x] : acc) next[i] = std::max(1.0, x);
        rho = std::move(next);
    }
    double total = 0.0;
    for (const auto& [id, r] : rho) total += r;
    return total;
}

namespace {

/// Unit-step evolution on the working graph, time measured on the original clock.
struct Frame {
    const AdjacencyOperator* op = nullptr;
    Rational c{1};
};

/// Step states with exact rational breakpoints. Always applicable.
struct RationalBackend {
    using State = RealStepState;

    const Frame& frame;
    Rational half;  // h/2 on the original clock

    State evolve_half(const State& s) const { return shift_evolve(*frame.op, s, frame.c * half); }
    State evolve_full(const State& s) const { return shift_evolve(*frame.op, s, frame.c * half * 2); }
    static State add(const State& a, const State& b) { return a + b; }
    static State scaled(const State& a, double x) { return scale(a, x); }
    static State mul(const State& q, const State& a) { return multiply(q, a); }
    State import(const RealStepState& s) const { return s; }
    RealStepState export_state(const State& s) const { return s; }
};

/// Step state whose breakpoints are integer multiples of 1/D.
struct TickState {
    std::vector<std::int64_t> bp{0, 0};
    std::vector<SparseVector<double>> values{SparseVector<double>{}};

    void canonicalize() {
        std::vector<std::int64_t> b{bp.front()};
        std::vector<SparseVector<double>> v;
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (!v.empty() && v.back() == values[k]) {
                b.back() = bp[k + 1];
                continue;
            }
            v.push_back(std::move(values[k]));
            b.push_back(bp[k + 1]);
        }
        bp = std::move(b);
        values = std::move(v);
    }
};

/// Integer tick positions: every breakpoint that can occur is a multiple of 1/D.
struct TickBackend {
    using State = TickState;

    const Frame& frame;
    std::int64_t D;
    std::int64_t half_ticks;

    State shift(const State& f, std::int64_t ticks) const {
        const std::int64_t n0 = ticks / D;
        const std::int64_t u = ticks % D;
        const std::size_t k = f.values.size();
        std::vector<SparseVector<double>> powered(k);
        for (std::size_t m = 0; m < k; ++m) {
            if (!(f.bp[m + 1] > u || f.bp[m] < u)) continue;
            SparseVector<double> v = f.values[m];
            for (std::int64_t step = 0; step < n0 && !v.empty(); ++step) v = frame.op->apply(v);
            powered[m] = std::move(v);
        }
        State out;
        out.bp = {0};
        out.values.clear();
        for (std::size_t m = 0; m < k; ++m) {
            if (!(f.bp[m + 1] > u)) continue;
            out.values.push_back(powered[m]);
            out.bp.push_back(f.bp[m + 1] - u);
        }
        if (u > 0)
            for (std::size_t m = 0; m < k; ++m) {
                if (!(f.bp[m] < u)) break;
                out.values.push_back(frame.op->apply(powered[m]));
                out.bp.push_back(std::min(f.bp[m + 1], u) + D - u);
            }
        out.canonicalize();
        return out;
    }

    template <class Fn>
    static State merge(const State& a, const State& b, Fn fn) {
        State out;
        out.bp.clear();
        out.values.clear();
        out.bp.reserve(a.bp.size() + b.bp.size());
        std::merge(a.bp.begin(), a.bp.end(), b.bp.begin(), b.bp.end(), std::back_inserter(out.bp));
        out.bp.erase(std::unique(out.bp.begin(), out.bp.end()), out.bp.end());
        out.values.reserve(out.bp.size() - 1);
        std::size_t ia = 0, ib = 0;
        for (std::size_t k = 0; k + 1 < out.bp.size(); ++k) {
            while (a.bp[ia + 1] <= out.bp[k]) ++ia;
            while (b.bp[ib + 1] <= out.bp[k]) ++ib;
            out.values.push_back(fn(a.values[ia], b.values[ib]));
        }
        out.canonicalize();
        return out;
    }

    State evolve_half(const State& s) const { return shift(s, half_ticks); }
    State evolve_full(const State& s) const { return shift(s, 2 * half_ticks); }
    static State add(const State& a, const State& b) {
        return merge(a, b, [](const SparseVector<double>& x, const SparseVector<double>& y) { return x + y; });
    }
    static State scaled(State a, double x) {
        for (auto& v : a.values) v *= x;
        a.canonicalize();
        return a;
    }
    static State mul(const State& q, const State& a) {
        return merge(q, a, [](const SparseVector<double>& x, const SparseVector<double>& y) {
            std::vector<std::pair<EdgeId, double>> out;
            auto ix = x.begin();
            auto iy = y.begin();
            while (ix != x.end() && iy != y.end()) {
                if (ix->first < iy->first)
                    ++ix;
                else if (iy->first < ix->first)
                    ++iy;
                else {
                    out.emplace_back(ix->first, ix->second * iy->second);
                    ++ix;
                    ++iy;
                }
            }
            return SparseVector<double>::from_entries(std::move(out));
        });
    }

    State import(const RealStepState& s) const {
        State out;
        out.bp.clear();
        for (const auto& b : s.breakpoints()) out.bp.push_back(to_int64(Integer(b * D)));
        out.values = s.values();
        return out;
    }
    RealStepState export_state(const State& s) const {
        std::vector<Rational> bp;
        for (std::int64_t b : s.bp) bp.emplace_back(ratio(b, D));
        for (auto& b : bp) b.canonicalize();
        return RealStepState(std::move(bp), s.values);
    }
};

/// Common denominator of every breakpoint reachable from f and q under shifts
/// by multiples of c h / 2, when it fits comfortably in 64 bits.
std::optional<std::int64_t> tick_denominator(const RealStepState& f, const RealStepState& q, const Rational& half_step) {
    Integer d(1);
    auto absorb = [&](const Rational& x) {
        Rational r = x;
        r.canonicalize();
        mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), r.get_den_mpz_t());
    };
    for (const auto& b : f.breakpoints()) absorb(b);
    for (const auto& b : q.breakpoints()) absorb(b);
    absorb(half_step);
    if (mpz_sizeinbase(d.get_mpz_t(), 2) > 40) return std::nullopt;
    return to_int64(d);
}

/// Every level lives on the lattice r_n = n h. The outer integral of each level
/// uses the midpoint rule on [r_n, r_n + h]; the midpoint value S_{k-1}(r_n + h/2)
/// is the half-step propagation of S_{k-1}(r_n) plus a trapezoid rule on the
/// half panel, which reuses the midpoint values of level k-2. Keeping a single
/// lattice puts the jump times caused by the breakpoints of q on panel
/// boundaries whenever they are multiples of h.
template <class Backend>
std::vector<RealStepState> dyson_terms(const Backend& be, const RealStepState& f_in, const RealStepState& q_in,
                                       double h, int steps, int order) {
    using State = typename Backend::State;
    const State f = be.import(f_in);
    const State q = be.import(q_in);
    std::vector<RealStepState> out(order + 1);
    std::vector<State> prev(steps + 1), prev_mid(steps);
    prev[0] = f;
    for (int n = 0; n < steps; ++n) {
        prev_mid[n] = be.evolve_half(prev[n]);
        prev[n + 1] = be.evolve_half(prev_mid[n]);
    }
    out[0] = be.export_state(prev[steps]);
    for (int k = 1; k <= order; ++k) {
        std::vector<State> cur(steps + 1), cur_mid(k < order ? steps : 0);
        cur[0] = be.import(RealStepState{});
        for (int n = 0; n < steps; ++n) {
            State kick = be.evolve_half(Backend::mul(q, prev_mid[n]));
            if (k < order) {
                State ends = Backend::add(be.evolve_half(Backend::mul(q, prev[n])), Backend::mul(q, prev_mid[n]));
                cur_mid[n] = Backend::add(be.evolve_half(cur[n]), Backend::scaled(ends, h / 4));
            }
            cur[n + 1] = Backend::add(be.evolve_full(cur[n]), Backend::scaled(kick, h));
        }
        out[k] = be.export_state(cur[steps]);
        prev = std::move(cur);
        prev_mid = std::move(cur_mid);
    }
    return out;
}

/// Same recursion for a scalar rate: S_k(t) = q0^k a_k(t) T(t).
std::vector<double> scalar_terms(int order, double t, int steps) {
    const double h = t / steps;
    std::vector<double> out(order + 1, 1.0);
    std::vector<double> prev(steps + 1, 1.0), prev_mid(steps, 1.0);
    for (int k = 1; k <= order; ++k) {
        std::vector<double> cur(steps + 1, 0.0), cur_mid(steps, 0.0);
        for (int n = 0; n < steps; ++n) {
            cur_mid[n] = cur[n] + h / 4 * (prev[n] + prev_mid[n]);
            cur[n + 1] = cur[n] + h * prev_mid[n];
        }
        out[k] = cur[steps];
        prev = std::move(cur);
        prev_mid = std::move(cur_mid);
    }
    return out;
}

double factorial_ratio(double x, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= x / i;
    return r;
}

template <class Lift, class Project>
AbsorbingResult run_dyson(const Frame& frame, const AbsorptionProfile& q, const NetworkState& f, const Rational& t,
                          const AbsorbingOptions& opts, double growth, const std::vector<EdgeId>& edges, Lift lift,
                          Project project) {
    if (opts.quad_steps <= 0) throw ArgumentError("quad_steps must be >= 1");
    if (opts.order < 0) throw ArgumentError("order must be >= 0");
    if (sgn(t) < 0) throw DomainError("evolution time must be nonnegative");

    AbsorbingResult res;
    res.order = opts.order;
    res.quad_steps = opts.quad_steps;
    res.growth_bound = growth;

    const double fnorm = to_double(sup_norm(f));
    const double x = growth * q.bound() * to_double(t);
    res.tail_bound = growth * factorial_ratio(x, opts.order + 1) * std::exp(x) * fnorm;

    if (sgn(t) == 0) {
        res.state = convert_state<double>(f);
        res.samples = sample(res.state, opts.grid);
        res.quadrature_bound = 0.0;
        return res;
    }

    const RealStepState lf = lift(convert_state<double>(f));
    const RealStepState lq = lift(q.q);
    const Rational half = t / (2 * opts.quad_steps);
    const double h = to_double(t / opts.quad_steps);
    std::vector<RealStepState> terms;
    if (auto d = tick_denominator(lf, lq, frame.c * half)) {
        Rational ticks = frame.c * half * *d;
        ticks.canonicalize();
        TickBackend be{frame, *d, to_int64(ticks.get_num())};
        terms = dyson_terms(be, lf, lq, h, opts.quad_steps, opts.order);
    } else {
        RationalBackend be{frame, half};
        terms = dyson_terms(be, lf, lq, h, opts.quad_steps, opts.order);
    }
    RealStepState total = terms[0];
    for (int k = 1; k <= opts.order; ++k) total = total + terms[k];
    res.state = project(total);
    res.samples = sample(res.state, opts.grid);

    if (auto q0 = q.uniform_constant(edges)) {
        const double td = to_double(t);
        const auto a = scalar_terms(opts.order, td, opts.quad_steps);
        const double base = sup_norm(project(terms[0]));
        double err = 0.0, mag = 0.0;
        for (int k = 0; k <= opts.order; ++k) {
            const double qk = std::pow(std::abs(*q0), k);
            err += qk * std::abs(a[k] - factorial_ratio(td, k));
            mag += qk * a[k];
        }
        // floating accumulation over (order+1) levels of quad_steps updates
        const double rounding = 4.0 * (opts.order + 1) * opts.quad_steps * std::numeric_limits<double>::epsilon() * mag;
        res.quadrature_bound = (err + rounding) * base;
    }
    return res;
}

}  // namespace

AbsorbingResult evolve_absorbing(const AdjacencyOperator& op, const AbsorptionProfile& q, const NetworkState& f,
                                 const Rational& t, const AbsorbingOptions& opts) {
    if (op.scaled()) throw WrongOperatorError("unit-velocity absorption needs the unscaled operator");
    Frame frame{&op, Rational(1)};
    std::vector<EdgeId> edges;
    if (op.graph().is_finite()) edges = op.graph().edge_ids();
    auto id = [](const RealStepState& s) { return s; };
    return run_dyson(frame, q, f, t, opts, 1.0, edges, id, id);
}

AbsorbingResult evolve_absorbing(const SubdivisionPlan& plan, const AbsorptionProfile& q, const NetworkState& f,
                                 const Rational& t, const AbsorbingOptions& opts) {
    Frame frame{plan.op.get(), plan.c};
    return run_dyson(
        frame, q, f, t, opts, growth_bound(plan, t), plan.original->edge_ids(),
        [&](const RealStepState& s) { return lift_state(plan, s); },
        [&](const RealStepState& s) { return project_state(plan, s); });
}

}  // namespace netflow
