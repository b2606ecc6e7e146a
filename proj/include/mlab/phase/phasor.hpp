#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mlab/phase/mod1.hpp"

namespace mlab::phase {

/// e(x) rounded to the integer lattice scaled by 2^30. Sums of phasors are
/// exact integers, so any two summation orders agree bit for bit.
inline constexpr int kPhasorBits = 30;
inline constexpr double kPhasorScale = 1073741824.0; // 2^30

struct Phasor {
    std::int64_t re = 0;
    std::int64_t im = 0;

    Phasor& operator+=(const Phasor& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Phasor& operator-=(const Phasor& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    friend Phasor operator+(Phasor a, const Phasor& b) { return a += b; }
    friend Phasor operator-(Phasor a, const Phasor& b) { return a -= b; }
    friend Phasor operator*(int w, const Phasor& p) { return {w * p.re, w * p.im}; }
    friend bool operator==(const Phasor&, const Phasor&) = default;

    /// |z|^2 exactly.
    i128 norm2() const { return static_cast<i128>(re) * re + static_cast<i128>(im) * im; }
    /// |z| in phasor units (divide by 2^30 for the real magnitude).
    double abs() const { return std::sqrt(static_cast<double>(norm2())); }
};

inline Phasor phasor_of_unit(double x) {
    double theta = 2.0 * std::numbers::pi * x;
    return {std::llround(std::cos(theta) * kPhasorScale), std::llround(std::sin(theta) * kPhasorScale)};
}

inline Phasor phasor_of(const Mod1Ring& ring, u128 residue) { return phasor_of_unit(ring.to_double(residue)); }

/// Product of two phasors, rounded back to the 2^30 lattice.
inline Phasor phasor_mul(const Phasor& a, const Phasor& b) {
    i128 re = static_cast<i128>(a.re) * b.re - static_cast<i128>(a.im) * b.im;
    i128 im = static_cast<i128>(a.re) * b.im + static_cast<i128>(a.im) * b.re;
    auto shift = [](i128 v) { return static_cast<std::int64_t>((v + (i128{1} << (kPhasorBits - 1))) >> kPhasorBits); };
    return {shift(re), shift(im)};
}

/// Phasors of all residues when the modulus is small enough to tabulate.
class PhasorCache {
  public:
    static constexpr u128 kMaxTable = u128{1} << 22;

    explicit PhasorCache(const Mod1Ring& ring) : ring_(ring) {
        if (!ring.fixed() && ring.modulus() <= kMaxTable) {
            table_.resize(static_cast<std::size_t>(ring.modulus()));
            for (std::size_t r = 0; r < table_.size(); ++r)
                table_[r] = phasor_of(ring, r);
        }
    }

    Phasor operator()(u128 residue) const {
        if (!table_.empty())
            return table_[static_cast<std::size_t>(residue)];
        return phasor_of(ring_, residue);
    }

  private:
    Mod1Ring ring_;
    std::vector<Phasor> table_;
};

} // namespace mlab::phase
