#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rauzy {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    auto trim = [](std::string& x) {
        auto b = x.find_first_not_of(" \t");
        auto e = x.find_last_not_of(" \t");
        x = b == std::string::npos ? std::string{} : x.substr(b, e - b + 1);
    };
    trim(s);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto valid_int = [](const std::string& x) {
        std::size_t i = (!x.empty() && (x[0] == '-' || x[0] == '+')) ? 1 : 0;
        if (i == x.size()) return false;
        for (; i < x.size(); ++i)
            if (x[i] < '0' || x[i] > '9') return false;
        return true;
    };
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        auto dot = s.find('.');
        if (dot == std::string::npos) {
            if (!valid_int(s)) throw std::invalid_argument("bad rational literal: " + s);
            return Rational(Int(s));
        }
        std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
        bool neg = !whole.empty() && whole[0] == '-';
        if (neg || (!whole.empty() && whole[0] == '+')) whole = whole.substr(1);
        if (whole.empty()) whole = "0";
        if (frac.empty() || !valid_int(whole) || !valid_int(frac) || frac[0] == '-' || frac[0] == '+')
            throw std::invalid_argument("bad decimal literal: " + s);
        Int den = boost::multiprecision::pow(Int(10), static_cast<unsigned>(frac.size()));
        Rational r(Int(whole) * den + Int(frac), den);
        return neg ? Rational(-r) : r;
    }
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    trim(num);
    trim(den);
    if (!valid_int(num) || !valid_int(den)) throw std::invalid_argument("bad rational literal: " + s);
    Int d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rational(Int(num), d);
}

inline std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

// Floor of r * 2^bits as an integer.
inline Int scaled_floor(const Rational& r, unsigned bits) {
    Int num = numerator(r) << bits;
    Int den = denominator(r);
    Int q = num / den;
    if (num < 0 && q * den != num) q -= 1;
    return q;
}

inline double to_double(const Rational& r) {
    if (r == 0) return 0.0;
    Int num = abs(numerator(r)), den = denominator(r);
    long shift = static_cast<long>(msb(num)) - static_cast<long>(msb(den));
    // keep 64 significant bits in the quotient
    Int q = shift >= 64 ? Int(num / (den << static_cast<unsigned>(shift - 64)))
                        : Int((num << static_cast<unsigned>(64 - shift)) / den);
    double v = std::ldexp(q.convert_to<double>(), static_cast<int>(shift - 64));
    return r < 0 ? -v : v;
}

// sqrt(r) for r >= 0, evaluated with `bits` fractional bits then rounded to double.
inline double sqrt_to_double(const Rational& r, unsigned bits) {
    if (r < 0) throw std::invalid_argument("sqrt of negative rational");
    if (r == 0) return 0.0;
    Int scaled = scaled_floor(r, 2 * bits);
    Int root = boost::multiprecision::sqrt(scaled);
    return std::ldexp(root.convert_to<double>(), -static_cast<int>(bits));
}

// Decimal rendering with a fixed number of fractional digits (truncated).
inline std::string to_decimal(const Rational& r, unsigned digits) {
    bool neg = r < 0;
    Rational a = neg ? Rational(-r) : r;
    Int scale = boost::multiprecision::pow(Int(10), digits);
    Int v = numerator(a) * scale / denominator(a);
    std::string s = v.str();
    if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
    std::string out = s.substr(0, s.size() - digits);
    if (digits > 0) out += "." + s.substr(s.size() - digits);
    return neg ? "-" + out : out;
}

inline Rational pow2_neg(unsigned bits) { return Rational(Int(1), Int(1) << bits); }

inline Rational abs_r(const Rational& r) { return r < 0 ? Rational(-r) : r; }

}  // namespace rauzy
