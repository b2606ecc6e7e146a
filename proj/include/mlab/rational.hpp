#pragma once

#include <compare>
#include <ostream>
#include <string>

#include "mlab/int128.hpp"

namespace mlab {

/// Exact rational with 128-bit numerator and positive denominator, always in
/// lowest terms. Every operation throws PrecisionError instead of wrapping.
class Rational {
  public:
    constexpr Rational() = default;
    Rational(i128 num) : num_(num), den_(1) {} // NOLINT(google-explicit-constructor)
    Rational(i128 num, i128 den) : num_(num), den_(den) {
        if (den_ == 0)
            throw ArgumentError("rational with zero denominator");
        normalize();
    }

    i128 num() const { return num_; }
    i128 den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    Rational operator-() const { return Rational(-num_, den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        i128 g = gcd128(a.den_, b.den_);
        i128 bd = b.den_ / g;
        i128 num = checked_add(checked_mul(a.num_, bd), checked_mul(b.num_, a.den_ / g));
        return Rational(num, checked_mul(a.den_, bd));
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        i128 g1 = gcd128(a.num_, b.den_);
        i128 g2 = gcd128(b.num_, a.den_);
        if (g1 == 0)
            g1 = 1;
        if (g2 == 0)
            g2 = 1;
        return Rational(checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0)
            throw ArgumentError("rational division by zero");
        return a * Rational(b.den_, b.num_);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        i128 lhs = checked_mul(a.num_, b.den_);
        i128 rhs = checked_mul(b.num_, a.den_);
        if (lhs < rhs)
            return std::strong_ordering::less;
        if (lhs > rhs)
            return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    i128 floor() const { return floor_div(num_, den_); }
    /// Nearest integer, ties rounded up.
    i128 round() const { return floor_div(checked_add(checked_mul(num_, 2), den_), checked_mul(den_, 2)); }
    Rational frac() const { return Rational(mod_floor(num_, den_), den_); }
    Rational abs() const { return Rational(abs128(num_), den_); }
    /// Distance to the nearest integer, exact.
    Rational dist_to_int() const {
        Rational f = frac();
        Rational g = Rational(1) - f;
        return f < g ? f : g;
    }

    double to_double() const { return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_)); }
    long double to_long_double() const { return static_cast<long double>(num_) / static_cast<long double>(den_); }

    std::string str() const {
        if (den_ == 1)
            return mlab::to_string(num_);
        return mlab::to_string(num_) + "/" + mlab::to_string(den_);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

  private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        i128 g = gcd128(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    i128 num_ = 0;
    i128 den_ = 1;
};

/// Parses "p", "p/q" or "-p/q".
inline Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos)
        return Rational(parse_i128(text));
    return Rational(parse_i128(text.substr(0, slash)), parse_i128(text.substr(slash + 1)));
}

inline i128 lcm128(i128 a, i128 b) {
    if (a == 0 || b == 0)
        return 0;
    return checked_mul(abs128(a) / gcd128(a, b), abs128(b));
}

} // namespace mlab
