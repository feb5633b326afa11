#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "stormlet/exceptions.hpp"

namespace stormlet {

/// Arbitrary-precision rational; used for exact constant folding and belief
/// arithmetic.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Exact conversion; every finite double is a dyadic rational.
inline Rational rationalFromDouble(double value) {
    return Rational(value);
}

inline double toDouble(Rational const& value) {
    return value.convert_to<double>();
}

/// Parses "123", "-4", "0.25" or "12.5e-3" style decimal literals exactly.
inline Rational rationalFromDecimalString(std::string const& text) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    BigInt numerator = 0;
    BigInt denominator = 1;
    bool sawDigit = false;
    for (; pos < text.size() && text[pos] >= '0' && text[pos] <= '9'; ++pos) {
        numerator = numerator * 10 + (text[pos] - '0');
        sawDigit = true;
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        for (; pos < text.size() && text[pos] >= '0' && text[pos] <= '9'; ++pos) {
            numerator = numerator * 10 + (text[pos] - '0');
            denominator *= 10;
            sawDigit = true;
        }
    }
    long exponent = 0;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        bool expNegative = false;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            expNegative = text[pos] == '-';
            ++pos;
        }
        bool sawExpDigit = false;
        for (; pos < text.size() && text[pos] >= '0' && text[pos] <= '9'; ++pos) {
            exponent = exponent * 10 + (text[pos] - '0');
            sawExpDigit = true;
        }
        if (!sawExpDigit) {
            throw ParseError("invalid numeric literal: " + text);
        }
        if (expNegative) {
            exponent = -exponent;
        }
    }
    if (!sawDigit || pos != text.size()) {
        throw ParseError("invalid numeric literal: " + text);
    }
    for (long i = 0; i < exponent; ++i) {
        numerator *= 10;
    }
    for (long i = 0; i > exponent; --i) {
        denominator *= 10;
    }
    Rational result(numerator, denominator);
    return negative ? -result : result;
}

inline std::string rationalToString(Rational const& value) {
    return value.str();
}

} // namespace stormlet
