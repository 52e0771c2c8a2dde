#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace etm {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// "3", "-2/5" or a finite decimal such as "0.125" or "1e-3".
inline Rational parse_rational(const std::string& text) {
    std::string s = text;
    if (s.empty()) throw std::invalid_argument("empty number");
    if (s.find('/') != std::string::npos) return Rational(s);
    std::size_t epos = s.find_first_of("eE");
    long exp10 = 0;
    if (epos != std::string::npos) {
        exp10 = std::stol(s.substr(epos + 1));
        s = s.substr(0, epos);
    }
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s = s.substr(1);
    }
    std::size_t dot = s.find('.');
    std::string digits = s;
    if (dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exp10 -= static_cast<long>(s.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("not a number: " + text);
    BigInt num(digits);
    BigInt scale = 1;
    for (long i = 0; i < (exp10 < 0 ? -exp10 : exp10); ++i) scale *= 10;
    Rational q = exp10 >= 0 ? Rational(num * scale) : Rational(num, scale);
    return neg ? Rational(-q) : q;
}

inline std::string to_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

}  // namespace etm
