#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>

#include "slocc/errors.hpp"

namespace slocc {

// Small exact fraction used for exponent schedules of operator families.
// Kept in lowest terms with a positive denominator.
struct frac {
    std::int64_t num = 0;
    std::int64_t den = 1;

    frac() = default;
    frac(std::int64_t n) : num(n), den(1) {}  // NOLINT: implicit by design
    frac(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw precondition_violated("frac: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool is_zero() const { return num == 0; }

    friend frac operator+(frac a, frac b) { return frac(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend frac operator-(frac a, frac b) { return frac(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend frac operator*(frac a, frac b) { return frac(a.num * b.num, a.den * b.den); }
    friend frac operator-(frac a) { return frac(-a.num, a.den); }
    friend bool operator==(frac a, frac b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(frac a, frac b) { return !(a == b); }
};

using bigrat = boost::multiprecision::cpp_rational;

// Exact element of Q(i), used by the tolerance-free pencil pipeline.
struct gauss_rat {
    bigrat re = 0;
    bigrat im = 0;

    gauss_rat() = default;
    gauss_rat(long n) : re(n) {}  // NOLINT: implicit by design
    gauss_rat(bigrat r, bigrat i = 0) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const { return re == 0 && im == 0; }
    gauss_rat conj() const { return {re, -im}; }

    std::complex<double> to_complex() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }

    friend gauss_rat operator+(const gauss_rat& a, const gauss_rat& b) { return {a.re + b.re, a.im + b.im}; }
    friend gauss_rat operator-(const gauss_rat& a, const gauss_rat& b) { return {a.re - b.re, a.im - b.im}; }
    friend gauss_rat operator-(const gauss_rat& a) { return {-a.re, -a.im}; }
    friend gauss_rat operator*(const gauss_rat& a, const gauss_rat& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend gauss_rat operator/(const gauss_rat& a, const gauss_rat& b) {
        if (b.is_zero()) throw precondition_violated("gauss_rat: division by zero");
        const bigrat d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    friend bool operator==(const gauss_rat& a, const gauss_rat& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const gauss_rat& a, const gauss_rat& b) { return !(a == b); }
};

// Parses a plain decimal literal ("-12", "3.25") into an exact rational.
// Exponent notation is intentionally not accepted.
inline bigrat decimal_to_rational(const std::string& text) {
    bigrat sign = 1;
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        if (text[pos] == '-') sign = -1;
        ++pos;
    }
    boost::multiprecision::cpp_int numer = 0;
    boost::multiprecision::cpp_int denom = 1;
    bool any_digit = false;
    bool after_point = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c >= '0' && c <= '9') {
            numer = numer * 10 + (c - '0');
            if (after_point) denom *= 10;
            any_digit = true;
        } else if (c == '.' && !after_point) {
            after_point = true;
        } else {
            throw precondition_violated("decimal_to_rational: bad literal '" + text + "'");
        }
    }
    if (!any_digit) throw precondition_violated("decimal_to_rational: no digits in '" + text + "'");
    return sign * bigrat(numer, denom);
}

}  // namespace slocc
