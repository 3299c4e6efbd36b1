#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace eightloop {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational rat(long long num, long long den = 1) { return Rational(num) / Rational(den); }

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// n!! with the conventions (-1)!! = 0!! = 1.
inline BigInt double_factorial(long long n) {
    BigInt r = 1;
    for (long long k = n; k > 1; k -= 2) r *= k;
    return r;
}

inline BigInt factorial(long long n) {
    BigInt r = 1;
    for (long long k = 2; k <= n; ++k) r *= k;
    return r;
}

inline std::string to_string(const Rational& q) {
    std::string num = boost::multiprecision::numerator(q).str();
    BigInt den = boost::multiprecision::denominator(q);
    if (den == 1) return num;
    return num + "/" + den.str();
}

}  // namespace eightloop
