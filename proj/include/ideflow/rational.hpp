#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace ideflow {

// Every scalar in this library (times, rates, lengths, volumes) is an exact
// arbitrary-precision rational. No floating point anywhere in the core.
using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rational(long num, long den = 1) { return Rational(Int(num), Int(den)); }

inline Int rat_num(const Rational& r) { return numerator(r); }
inline Int rat_den(const Rational& r) { return denominator(r); }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

// Largest integer <= r.
inline Int rat_floor(const Rational& r) {
    Int n = numerator(r), d = denominator(r);
    Int q = n / d;
    if (n < 0 && q * d != n) --q;
    return q;
}

inline Int rat_ceil(const Rational& r) {
    Int n = numerator(r), d = denominator(r);
    Int q = n / d;
    if (n > 0 && q * d != n) ++q;
    return q;
}

inline Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

inline Rational rat_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rat_max(const Rational& a, const Rational& b) { return a > b ? a : b; }

// Positive gcd of two rationals: the largest rational dividing both.
Rational rat_gcd(const Rational& a, const Rational& b);

// "p" for integers, "p/q" otherwise.
std::string to_string(const Rational& r);

// Accepts "p", "-p", "p/q", and decimal literals like "0.5".
std::optional<Rational> parse_rational(const std::string& s);

// Decimal rendering; exact when the denominator is of the form 2^a 5^b,
// otherwise rounded to max_frac_digits digits.
std::string decimal_string(const Rational& r, int max_frac_digits = 12);

Int int_pow(Int base, unsigned exp);

// 3^e as a Rational; the gadget formulas use this constantly.
inline Rational pow3(unsigned e) { return Rational(int_pow(3, e)); }

}  // namespace ideflow
