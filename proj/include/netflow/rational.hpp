#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

namespace netflow {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses `p`, `-p` or `p/q` into a canonical rational. Decimal literals are
/// rejected with PrecisionError since they would silently round in exact paths.
Rational parse_rational(std::string_view text);

/// Like parse_rational but also accepts finite decimals (`0.25`, `-3e-2`),
/// converted exactly.
Rational parse_exact_decimal(std::string_view text);

std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

/// p / q in canonical form. mpq_class(p, q) skips canonicalization, which
/// breaks equality and comparisons.
template <class P, class Q>
Rational ratio(const P& p, const Q& q) {
    Rational r(p, q);
    r.canonicalize();
    return r;
}

/// Exact value of a finite double.
Rational from_double(double x);

Integer floor(const Rational& q);

/// q - floor(q), in [0, 1).
Rational frac(const Rational& q);

inline Rational abs(const Rational& q) { return ::abs(q); }

/// Fits in a signed 64-bit integer.
bool fits_int64(const Integer& z);
std::int64_t to_int64(const Integer& z);

// Scalar traits shared by the sparse containers. Norms are real-valued, the
// exact type keeps its own norm so exact comparisons stay exact.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
    using Norm = Rational;
    static Norm magnitude(const Rational& x) { return ::abs(x); }
    static bool is_zero(const Rational& x) { return sgn(x) == 0; }
};

template <>
struct ScalarTraits<double> {
    using Norm = double;
    static Norm magnitude(double x) { return x < 0 ? -x : x; }
    static bool is_zero(double x) { return x == 0.0; }
};

template <>
struct ScalarTraits<std::complex<double>> {
    using Norm = double;
    static Norm magnitude(const std::complex<double>& x) { return std::abs(x); }
    static bool is_zero(const std::complex<double>& x) { return x == std::complex<double>{}; }
};

template <class To>
To scalar_cast(const Rational& x);

template <>
inline Rational scalar_cast<Rational>(const Rational& x) { return x; }
template <>
inline double scalar_cast<double>(const Rational& x) { return x.get_d(); }
template <>
inline std::complex<double> scalar_cast<std::complex<double>>(const Rational& x) {
    return {x.get_d(), 0.0};
}

inline double norm_to_double(const Rational& x) { return x.get_d(); }
inline double norm_to_double(double x) { return x; }

}  // namespace netflow
