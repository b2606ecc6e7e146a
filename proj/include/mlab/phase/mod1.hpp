#pragma once

#include <cstdint>
#include <string>

#include "mlab/error.hpp"
#include "mlab/int128.hpp"
#include "mlab/rational.hpp"

namespace mlab::phase {

/// 2^127: the grid of FIXED127 fractional parts.
inline constexpr u128 kFixedModulus = u128{1} << 127;

/// Largest common denominator accepted in RATIONAL mode.
inline constexpr u128 kMaxRationalDenominator = u128{1} << 63;

/// Arithmetic on residues a in [0, M), representing a/M in R/Z. M is either a
/// rational common denominator (at most 2^63) or 2^127. Every operation is
/// exact integer arithmetic.
class Mod1Ring {
  public:
    constexpr Mod1Ring() = default;
    explicit Mod1Ring(u128 modulus) : m_(modulus) {
        if (m_ == 0 || (m_ > kMaxRationalDenominator && m_ != kFixedModulus))
            throw PrecisionError("mod-1 modulus " + to_string(m_) + " is neither <= 2^63 nor 2^127; use FIXED127");
    }

    u128 modulus() const { return m_; }
    bool fixed() const { return m_ == kFixedModulus; }

    u128 add(u128 a, u128 b) const {
        u128 r = a + b;
        return r >= m_ ? r - m_ : r;
    }
    u128 sub(u128 a, u128 b) const { return a >= b ? a - b : a + (m_ - b); }
    u128 neg(u128 a) const { return a == 0 ? 0 : m_ - a; }

    u128 mul(u128 a, u128 b) const {
        if (fixed())
            return (a * b) & (kFixedModulus - 1);
        return (a % m_) * (b % m_) % m_;
    }

    /// Reduction of a signed integer.
    u128 from_int(i128 n) const {
        if (fixed())
            return static_cast<u128>(n) & (kFixedModulus - 1);
        i128 r = n % static_cast<i128>(m_);
        return static_cast<u128>(r < 0 ? r + static_cast<i128>(m_) : r);
    }

    /// Residue of a rational whose denominator divides M (RATIONAL mode).
    u128 from_rational(const Rational& x) const {
        if (fixed())
            return quantize(x);
        if (static_cast<u128>(x.den()) > m_ || m_ % static_cast<u128>(x.den()) != 0)
            throw ArgumentError("denominator " + to_string(x.den()) + " does not divide modulus " + to_string(m_));
        i128 scale = static_cast<i128>(m_ / static_cast<u128>(x.den()));
        i128 num = mod_floor(x.num(), x.den());
        return static_cast<u128>(num * scale);
    }

    /// Nearest point of the 2^-127 grid to {x}, ties up.
    static u128 quantize(const Rational& x) {
        Rational f = x.frac();
        u128 num = static_cast<u128>(f.num()), den = static_cast<u128>(f.den());
        u128 q = 0, r = num;
        for (int bit = 0; bit < 127; ++bit) {
            r <<= 1;
            q <<= 1;
            if (r >= den) {
                r -= den;
                q |= 1;
            }
        }
        if (2 * r >= den)
            ++q;
        return q & (kFixedModulus - 1);
    }

    double to_double(u128 a) const {
        if (fixed())
            return static_cast<double>(static_cast<std::uint64_t>(a >> 63)) * 0x1p-64;
        return static_cast<double>(static_cast<long double>(a) / static_cast<long double>(m_));
    }

    /// a/M as an exact rational. Odd FIXED127 residues have no i128 form.
    Rational to_rational(u128 a) const {
        if (fixed()) {
            u128 num = a, den = kFixedModulus;
            while (num % 2 == 0 && den > 1) {
                num /= 2;
                den /= 2;
            }
            if (den == kFixedModulus)
                throw PrecisionError("2^127 denominator exceeds rational range");
            return Rational(static_cast<i128>(num), static_cast<i128>(den));
        }
        return Rational(static_cast<i128>(a), static_cast<i128>(m_));
    }

    /// Distance from a/M to the nearest integer, as a residue in [0, M/2].
    u128 dist_residue(u128 a) const { return a <= m_ - a ? a : m_ - a; }

    friend bool operator==(const Mod1Ring&, const Mod1Ring&) = default;

  private:
    u128 m_ = 1;
};

} // namespace mlab::phase
