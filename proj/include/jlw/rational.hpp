#ifndef JLW_RATIONAL_HPP
#define JLW_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace jlw {

/// Exact rational scalar used throughout the decomposition core.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// ============================================================================
// Parsing and formatting
// ============================================================================

/**
 * Parses a rational literal. Accepted forms: "3", "-7", "3/10", "-3/10",
 * "0.3", "-12.5". Throws std::invalid_argument on anything else, including
 * zero denominators.
 */
inline Rational parse_rational(const std::string& text) {
    const auto fail = [&text]() -> Rational {
        throw std::invalid_argument("not a rational literal: '" + text + "'");
    };
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    const auto digits = [&](std::size_t& p) {
        std::string out;
        while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) out += text[p++];
        return out;
    };
    const std::string whole = digits(pos);
    if (whole.empty()) return fail();
    Rational value;
    if (pos == text.size()) {
        value = Rational(Integer(whole));
    } else if (text[pos] == '/') {
        ++pos;
        const std::string den = digits(pos);
        if (den.empty() || pos != text.size()) return fail();
        const Integer d(den);
        if (d == 0) throw std::invalid_argument("zero denominator: '" + text + "'");
        value = Rational(Integer(whole), d);
    } else if (text[pos] == '.') {
        ++pos;
        const std::string frac = digits(pos);
        if (frac.empty() || pos != text.size()) return fail();
        Integer scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        value = Rational(Integer(whole) * scale + Integer(frac), scale);
    } else {
        return fail();
    }
    return negative ? Rational(-value) : value;
}

/// Canonical "p/q" rendering; integers render without the denominator.
inline std::string format_rational(const Rational& value) {
    const Integer num = boost::multiprecision::numerator(value);
    const Integer den = boost::multiprecision::denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline double to_double(const Rational& value) { return value.convert_to<double>(); }

/// Nearest integer (ties round away from zero). Throws on 64-bit overflow.
inline std::int64_t round_to_int64(const Rational& value) {
    const Integer num = boost::multiprecision::numerator(value);
    const Integer den = boost::multiprecision::denominator(value);
    // Truncation floors non-negative values of `twice` and ceils negative
    // ones, which is exactly round-half-away-from-zero after the +-den shift.
    const Integer twice = 2 * num + (num >= 0 ? den : -den);
    const Integer rounded = twice / (2 * den);
    if (rounded > std::numeric_limits<std::int64_t>::max() ||
        rounded < std::numeric_limits<std::int64_t>::min())
        throw std::overflow_error("rounded rational does not fit in 64 bits");
    return rounded.convert_to<std::int64_t>();
}

// ============================================================================
// Integer rescaling
// ============================================================================

/**
 * Rescales positive rational weights by the least common denominator so that
 * weighted comparisons w_j * x_j reduce to exact integer comparisons.
 * Throws std::overflow_error if a rescaled weight does not fit in 64 bits.
 */
inline std::vector<std::int64_t> scaled_integer_weights(const std::vector<Rational>& weights) {
    Integer lcm = 1;
    for (const Rational& w : weights) {
        const Integer den = boost::multiprecision::denominator(w);
        lcm = boost::multiprecision::lcm(lcm, den);
    }
    std::vector<std::int64_t> scaled;
    scaled.reserve(weights.size());
    for (const Rational& w : weights) {
        const Rational s = w * lcm;
        const Integer v = boost::multiprecision::numerator(s);
        if (v > std::numeric_limits<std::int64_t>::max() || v <= 0)
            throw std::overflow_error("weight does not admit a 64-bit integer rescaling");
        scaled.push_back(v.convert_to<std::int64_t>());
    }
    return scaled;
}

}  // namespace jlw

#endif  // JLW_RATIONAL_HPP
