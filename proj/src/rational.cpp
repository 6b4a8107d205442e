#include "ideflow/rational.hpp"

#include <boost/multiprecision/integer.hpp>

#include <cctype>
#include <sstream>

namespace ideflow {

Rational rat_gcd(const Rational& a, const Rational& b) {
    if (a == 0) return rat_abs(b);
    if (b == 0) return rat_abs(a);
    Int n = gcd(abs(numerator(a)), abs(numerator(b)));
    Int d = lcm(denominator(a), denominator(b));
    return Rational(n, d);
}

std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << "/" << denominator(r);
    return os.str();
}

std::optional<Rational> parse_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto is_int = [](const std::string& t) {
        if (t.empty()) return false;
        size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
        return true;
    };
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        if (!is_int(num) || !is_int(den)) return std::nullopt;
        Int d(den);
        if (d == 0) return std::nullopt;
        return Rational(Int(num), d);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string head = s.substr(0, dot), frac = s.substr(dot + 1);
        if (head.empty() || head == "-" || head == "+") head += "0";
        if (!is_int(head) || frac.empty()) return std::nullopt;
        for (char c : frac)
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        Int scale = int_pow(10, static_cast<unsigned>(frac.size()));
        Int whole(head);
        Int f(frac);
        bool neg = s[0] == '-';
        Int n = abs(whole) * scale + f;
        if (neg) n = -n;
        return Rational(n, scale);
    }
    if (!is_int(s)) return std::nullopt;
    return Rational(Int(s));
}

std::string decimal_string(const Rational& r, int max_frac_digits) {
    Int n = abs(numerator(r)), d = denominator(r);
    if (n % d == 0) {
        std::ostringstream os;
        if (r < 0) os << "-";
        os << (n / d);
        return os.str();
    }
    // Round |r| * 10^digits to the nearest integer, then place the point.
    Int scale = int_pow(10, static_cast<unsigned>(max_frac_digits));
    Int scaled = (n * scale * 2 + d) / (2 * d);
    std::ostringstream whole;
    whole << (scaled / scale);
    std::ostringstream frac;
    frac << (scaled % scale);
    std::string fs = frac.str();
    fs.insert(fs.begin(), static_cast<size_t>(max_frac_digits) - fs.size(), '0');
    while (!fs.empty() && fs.back() == '0') fs.pop_back();
    std::string out = (r < 0 ? "-" : "") + whole.str();
    if (!fs.empty()) out += "." + fs;
    return out;
}

Int int_pow(Int base, unsigned exp) {
    Int out = 1;
    while (exp) {
        if (exp & 1u) out *= base;
        base *= base;
        exp >>= 1u;
    }
    return out;
}

}  // namespace ideflow
