#include "netflow/rational.hpp"

#include "netflow/errors.hpp"

#include <cctype>
#include <cmath>
#include <limits>

namespace netflow {

namespace {

bool is_integer_literal(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

Integer parse_integer(std::string_view s) {
    if (!s.empty() && s[0] == '+') s.remove_prefix(1);
    return Integer(std::string(s), 10);
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        if (is_integer_literal(text)) return Rational(parse_integer(text));
        if (text.find_first_of(".eE") != std::string_view::npos)
            throw PrecisionError("decimal literal '" + std::string(text) +
                                 "' where an exact rational p/q is required");
        throw ParseError("literal", 0, "not a rational: '" + std::string(text) + "'");
    }
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!is_integer_literal(num) || !is_integer_literal(den) || den[0] == '-')
        throw ParseError("literal", 0, "not a rational: '" + std::string(text) + "'");
    Integer d = parse_integer(den);
    if (d == 0) throw ParseError("literal", 0, "zero denominator in '" + std::string(text) + "'");
    Rational q(parse_integer(num), d);
    q.canonicalize();
    return q;
}

Rational parse_exact_decimal(std::string_view text) {
    if (text.find('/') != std::string_view::npos || is_integer_literal(text))
        return parse_rational(text);
    std::string s(text);
    std::size_t epos = s.find_first_of("eE");
    long exponent = 0;
    if (epos != std::string::npos) {
        try {
            exponent = std::stol(s.substr(epos + 1));
        } catch (const std::exception&) {
            throw ParseError("literal", 0, "bad exponent in '" + s + "'");
        }
        s = s.substr(0, epos);
    }
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    const auto dot = s.find('.');
    std::string digits = s;
    if (dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exponent -= static_cast<long>(s.size() - dot - 1);
    }
    if (digits.empty() || !is_integer_literal(digits))
        throw ParseError("literal", 0, "not a number: '" + std::string(text) + "'");
    Integer mant(digits, 10);
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
    Rational q = exponent >= 0 ? Rational(mant * scale) : ratio(mant, scale);
    q.canonicalize();
    return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

Rational from_double(double x) {
    if (!std::isfinite(x)) throw PrecisionError("non-finite value has no rational form");
    Rational q(x);  // mpq_set_d is exact
    q.canonicalize();
    return q;
}

Integer floor(const Rational& q) {
    Integer z;
    mpz_fdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return z;
}

Rational frac(const Rational& q) { return q - Rational(floor(q)); }

bool fits_int64(const Integer& z) {
    static const Integer lo(std::to_string(std::numeric_limits<std::int64_t>::min()), 10);
    static const Integer hi(std::to_string(std::numeric_limits<std::int64_t>::max()), 10);
    return z >= lo && z <= hi;
}

std::int64_t to_int64(const Integer& z) {
    if (!fits_int64(z)) throw OverflowError("integer " + z.get_str() + " exceeds 64 bits");
    return std::stoll(z.get_str());
}

}  // namespace netflow
