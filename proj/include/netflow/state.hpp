#pragma once

#include "netflow/errors.hpp"
#include "netflow/graph.hpp"
#include "netflow/rational.hpp"
#include "netflow/sparse_vector.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace netflow {

/// Piecewise-constant element of L^inf([0,1], l^1) on one breakpoint grid shared
/// by all edges. Piece m holds its value on [b_m, b_{m+1}); the point 1 belongs
/// to the last piece. Always stored in canonical form: adjacent equal pieces
/// merged and zero entries dropped, so `==` is equality of states.
template <class T>
class StepState {
public:
    using Value = SparseVector<T>;

    StepState() : breakpoints_{Rational(0), Rational(1)}, values_(1) {}

    StepState(std::vector<Rational> breakpoints, std::vector<Value> values)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
        if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size())
            throw ArgumentError("state needs k+1 breakpoints for k >= 1 pieces");
        if (breakpoints_.front() != 0 || breakpoints_.back() != 1)
            throw ArgumentError("state breakpoints must run from 0 to 1");
        for (std::size_t k = 1; k < breakpoints_.size(); ++k)
            if (!(breakpoints_[k - 1] < breakpoints_[k]))
                throw ArgumentError("state breakpoints must be strictly increasing");
        canonicalize();
    }

    static StepState constant(Value v) { return StepState({Rational(0), Rational(1)}, {std::move(v)}); }

    std::size_t pieces() const { return values_.size(); }
    const std::vector<Rational>& breakpoints() const { return breakpoints_; }
    const std::vector<Value>& values() const { return values_; }

    std::size_t piece_index(const Rational& s) const {
        auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, s);
        return static_cast<std::size_t>(it - (breakpoints_.begin() + 1));
    }
    std::size_t piece_index(double s) const {
        auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, s,
                                   [](double x, const Rational& b) { return x < b.get_d(); });
        return static_cast<std::size_t>(it - (breakpoints_.begin() + 1));
    }

    const Value& at(const Rational& s) const { return values_[piece_index(s)]; }
    const Value& at(double s) const { return values_[piece_index(s)]; }

    std::vector<EdgeId> support() const {
        std::vector<EdgeId> ids;
        for (const auto& v : values_)
            for (const auto& e : v) ids.push_back(e.first);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return ids;
    }

    bool is_zero() const { return values_.size() == 1 && values_[0].empty(); }

    friend bool operator==(const StepState& a, const StepState& b) {
        return a.breakpoints_ == b.breakpoints_ && a.values_ == b.values_;
    }

    template <class U, class Fn>
    StepState<U> transform(Fn fn) const {
        std::vector<SparseVector<U>> vals;
        vals.reserve(values_.size());
        for (const auto& v : values_) vals.push_back(v.template transform<U>(fn));
        return StepState<U>(breakpoints_, std::move(vals));
    }

private:
    void canonicalize() {
        std::vector<Rational> bp{breakpoints_.front()};
        std::vector<Value> vals;
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!vals.empty() && vals.back() == values_[k]) {
                bp.back() = breakpoints_[k + 1];
                continue;
            }
            vals.push_back(std::move(values_[k]));
            bp.push_back(breakpoints_[k + 1]);
        }
        breakpoints_ = std::move(bp);
        values_ = std::move(vals);
    }

    std::vector<Rational> breakpoints_;
    std::vector<Value> values_;
};

using NetworkState = StepState<Rational>;
/// Element of L^1([0,1], c_0) used as the right argument of the pairing.
using TestFunction = StepState<Rational>;
using RealStepState = StepState<double>;

template <class To>
StepState<To> convert_state(const NetworkState& f) {
    return f.transform<To>([](const Rational& x) { return scalar_cast<To>(x); });
}

/// Values on the uniform grid s_m = m / M, m = 0..M.
template <class T>
struct SampledState {
    int grid = 1;
    std::vector<SparseVector<T>> samples;

    double point(int m) const { return static_cast<double>(m) / grid; }
    Rational exact_point(int m) const { return ratio(m, grid); }
    std::vector<EdgeId> support() const {
        std::vector<EdgeId> ids;
        for (const auto& v : samples)
            for (const auto& e : v) ids.push_back(e.first);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return ids;
    }
};

/// Merges the breakpoint grids of `a` and `b` and applies `fn` piecewise.
template <class A, class B, class Fn>
auto combine(const StepState<A>& a, const StepState<B>& b, Fn fn)
    -> StepState<typename std::invoke_result_t<Fn, const SparseVector<A>&, const SparseVector<B>&>::value_type> {
    using R = typename std::invoke_result_t<Fn, const SparseVector<A>&, const SparseVector<B>&>::value_type;
    const auto& ba = a.breakpoints();
    const auto& bb = b.breakpoints();
    std::vector<Rational> grid;
    grid.reserve(ba.size() + bb.size());
    std::merge(ba.begin(), ba.end(), bb.begin(), bb.end(), std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<SparseVector<R>> vals;
    vals.reserve(grid.size() - 1);
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        while (ba[ia + 1] <= grid[k]) ++ia;
        while (bb[ib + 1] <= grid[k]) ++ib;
        vals.push_back(fn(a.values()[ia], b.values()[ib]));
    }
    return StepState<R>(std::move(grid), std::move(vals));
}

template <class T>
StepState<T> operator+(const StepState<T>& a, const StepState<T>& b) {
    return combine(a, b, [](const SparseVector<T>& x, const SparseVector<T>& y) { return x + y; });
}

template <class T>
StepState<T> operator-(const StepState<T>& a, const StepState<T>& b) {
    return combine(a, b, [](const SparseVector<T>& x, const SparseVector<T>& y) { return x - y; });
}

template <class T>
StepState<T> scale(const StepState<T>& a, const T& s) {
    std::vector<SparseVector<T>> vals = a.values();
    for (auto& v : vals) v *= s;
    return StepState<T>(a.breakpoints(), std::move(vals));
}

/// ess sup of ||f(s)||_1, the max over pieces.
template <class T>
typename SparseVector<T>::Norm sup_norm(const StepState<T>& f) {
    typename SparseVector<T>::Norm best(0);
    for (const auto& v : f.values()) {
        auto n = norm1(v);
        if (best < n) best = n;
    }
    return best;
}

template <class T>
double sup_norm(const SampledState<T>& f) {
    double best = 0.0;
    for (const auto& v : f.samples) best = std::max(best, norm_to_double(norm1(v)));
    return best;
}

/// Signed integral of sum_j f_j over [0,1].
template <class T>
T total_mass(const StepState<T>& f) {
    T total(0);
    const auto& bp = f.breakpoints();
    for (std::size_t k = 0; k < f.pieces(); ++k)
        total += scalar_cast<T>(Rational(bp[k + 1] - bp[k])) * sum(f.values()[k]);
    return total;
}

/// Integral of sum_j |g_j| over [0,1].
Rational l1_norm(const TestFunction& g);

/// (right trace at 0, left trace at 1).
template <class T>
std::pair<SparseVector<T>, SparseVector<T>> traces(const StepState<T>& f) {
    return {f.values().front(), f.values().back()};
}

/// ||f(1) - op f(0)||_1: zero iff the trace-level boundary condition holds.
template <class T>
double boundary_residual(const StepState<T>& f, const AdjacencyOperator& op) {
    auto [at0, at1] = traces(f);
    return norm_to_double(norm1(at1 - op.apply(at0)));
}

template <class T>
SampledState<T> sample(const StepState<T>& f, int grid) {
    if (grid < 1) throw ArgumentError("sample grid M must be >= 1");
    SampledState<T> out;
    out.grid = grid;
    out.samples.reserve(grid + 1);
    for (int m = 0; m <= grid; ++m) out.samples.push_back(f.at(ratio(m, grid)));
    return out;
}

template <class T>
T dot(const SparseVector<T>& a, const SparseVector<Rational>& b) {
    T total(0);
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first < ib->first)
            ++ia;
        else if (ib->first < ia->first)
            ++ib;
        else {
            total += ia->second * scalar_cast<T>(ib->second);
            ++ia;
            ++ib;
        }
    }
    return total;
}

/// <f, g> = int_0^1 sum_j f_j(s) g_j(s) ds, exact on the merged grid.
template <class T>
T pair(const StepState<T>& f, const TestFunction& g) {
    T total(0);
    const auto& bf = f.breakpoints();
    const auto& bg = g.breakpoints();
    std::size_t i = 0, k = 0;
    Rational lo(0);
    while (i < f.pieces() && k < g.pieces()) {
        const Rational& hi = bf[i + 1] < bg[k + 1] ? bf[i + 1] : bg[k + 1];
        total += scalar_cast<T>(Rational(hi - lo)) * dot(f.values()[i], g.values()[k]);
        lo = hi;
        if (bf[i + 1] == hi) ++i;
        if (bg[k + 1] == hi) ++k;
    }
    return total;
}

/// Composite trapezoid of the pairing on the sample grid.
template <class T>
T pair(const SampledState<T>& f, const TestFunction& g) {
    T total(0);
    const int M = f.grid;
    for (int m = 0; m <= M; ++m) {
        T term = dot(f.samples[m], g.at(ratio(m, M)));
        total += (m == 0 || m == M) ? term * T(0.5) : term;
    }
    return total / T(M);
}

/// True when every stored value is >= 0.
bool is_nonnegative(const NetworkState& f);

}  // namespace netflow
