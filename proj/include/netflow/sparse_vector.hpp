#pragma once

#include "netflow/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

namespace netflow {

using EdgeId = std::int64_t;

/// Finitely supported vector indexed by edge id. Entries are kept sorted by id
/// with no explicit zeros, so structural equality is value equality.
template <class T>
class SparseVector {
public:
    using value_type = T;
    using Entry = std::pair<EdgeId, T>;
    using Norm = typename ScalarTraits<T>::Norm;

    SparseVector() = default;

    /// Sorts, sums duplicate ids and drops zeros.
    static SparseVector from_entries(std::vector<Entry> entries) {
        SparseVector v;
        if (!std::is_sorted(entries.begin(), entries.end(),
                            [](const Entry& a, const Entry& b) { return a.first < b.first; }))
            std::sort(entries.begin(), entries.end(),
                      [](const Entry& a, const Entry& b) { return a.first < b.first; });
        v.entries_.reserve(entries.size());
        for (auto& e : entries) {
            if (!v.entries_.empty() && v.entries_.back().first == e.first)
                v.entries_.back().second += e.second;
            else
                v.entries_.push_back(std::move(e));
        }
        v.drop_zeros();
        return v;
    }

    static SparseVector unit(EdgeId id, T value = T(1)) {
        SparseVector v;
        if (!ScalarTraits<T>::is_zero(value)) v.entries_.emplace_back(id, std::move(value));
        return v;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    T at(EdgeId id) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                                   [](const Entry& e, EdgeId key) { return e.first < key; });
        if (it != entries_.end() && it->first == id) return it->second;
        return T(0);
    }

    std::vector<EdgeId> support() const {
        std::vector<EdgeId> ids;
        ids.reserve(entries_.size());
        for (const auto& e : entries_) ids.push_back(e.first);
        return ids;
    }

    SparseVector& operator+=(const SparseVector& other) {
        merge(other, [](T& a, const T& b) { a += b; }, [](const T& b) { return b; });
        return *this;
    }

    SparseVector& operator-=(const SparseVector& other) {
        merge(other, [](T& a, const T& b) { a -= b; }, [](const T& b) { return T(-b); });
        return *this;
    }

    SparseVector& operator*=(const T& s) {
        if (ScalarTraits<T>::is_zero(s)) {
            entries_.clear();
            return *this;
        }
        for (auto& e : entries_) e.second *= s;
        drop_zeros();
        return *this;
    }

    /// Adds s * other.
    void axpy(const T& s, const SparseVector& other) {
        if (ScalarTraits<T>::is_zero(s)) return;
        merge(other, [&](T& a, const T& b) { a += s * b; }, [&](const T& b) { return T(s * b); });
    }

    friend SparseVector operator+(SparseVector a, const SparseVector& b) { return a += b; }
    friend SparseVector operator-(SparseVector a, const SparseVector& b) { return a -= b; }
    friend SparseVector operator*(const T& s, SparseVector a) { return a *= s; }
    friend bool operator==(const SparseVector& a, const SparseVector& b) {
        return a.entries_ == b.entries_;
    }

    /// Elementwise conversion through `fn`, re-normalized.
    template <class U, class Fn>
    SparseVector<U> transform(Fn fn) const {
        std::vector<std::pair<EdgeId, U>> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.emplace_back(e.first, fn(e.second));
        return SparseVector<U>::from_entries(std::move(out));
    }

private:
    template <class Combine, class Fresh>
    void merge(const SparseVector& other, Combine combine, Fresh fresh) {
        if (other.entries_.empty()) return;
        std::vector<Entry> out;
        out.reserve(entries_.size() + other.entries_.size());
        auto a = entries_.begin();
        auto b = other.entries_.begin();
        while (a != entries_.end() || b != other.entries_.end()) {
            if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
                out.push_back(std::move(*a++));
            } else if (a == entries_.end() || b->first < a->first) {
                out.emplace_back(b->first, fresh(b->second));
                ++b;
            } else {
                combine(a->second, b->second);
                out.push_back(std::move(*a++));
                ++b;
            }
        }
        entries_ = std::move(out);
        drop_zeros();
    }

    void drop_zeros() {
        std::erase_if(entries_, [](const Entry& e) { return ScalarTraits<T>::is_zero(e.second); });
    }

    std::vector<Entry> entries_;
};

template <class T>
typename SparseVector<T>::Norm norm1(const SparseVector<T>& v) {
    typename SparseVector<T>::Norm total(0);
    for (const auto& e : v) total += ScalarTraits<T>::magnitude(e.second);
    return total;
}

template <class T>
T sum(const SparseVector<T>& v) {
    T total(0);
    for (const auto& e : v) total += e.second;
    return total;
}

template <class To>
SparseVector<To> convert(const SparseVector<Rational>& v) {
    return v.template transform<To>([](const Rational& x) { return scalar_cast<To>(x); });
}

inline SparseVector<std::complex<double>> complexify(const SparseVector<double>& v) {
    return v.transform<std::complex<double>>([](double x) { return std::complex<double>(x, 0.0); });
}

}  // namespace netflow
