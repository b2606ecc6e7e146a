#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mlab/error.hpp"

namespace mlab::arith {

/// A Dirichlet character mod s, stored as exponents: chi(a) = e(k(a)/L) where
/// L is the exponent of (Z/s)^x, and k(a) = -1 marks gcd(a, s) > 1.
class DirichletCharacter {
  public:
    DirichletCharacter(std::uint64_t modulus, std::uint64_t order_base, std::vector<std::int64_t> exponents, std::size_t index)
        : modulus_(modulus), order_base_(order_base), exponents_(std::move(exponents)), index_(index) {
        principal_ = true;
        for (auto k : exponents_)
            if (k > 0)
                principal_ = false;
        conductor_ = compute_conductor();
    }

    std::uint64_t modulus() const { return modulus_; }
    /// L such that every value is an L-th root of unity.
    std::uint64_t order_base() const { return order_base_; }
    std::uint64_t conductor() const { return conductor_; }
    bool principal() const { return principal_; }
    std::size_t index() const { return index_; }

    /// k with chi(n) = e(k/L), or -1 when gcd(n, s) > 1.
    std::int64_t exponent(std::uint64_t n) const { return exponents_[n % modulus_]; }

    std::complex<double> operator()(std::uint64_t n) const {
        std::int64_t k = exponent(n);
        if (k < 0)
            return {0.0, 0.0};
        if (k == 0)
            return {1.0, 0.0};
        // Exact values at the real points keep real characters real.
        if (2 * static_cast<std::uint64_t>(k) == order_base_)
            return {-1.0, 0.0};
        double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(order_base_);
        return {std::cos(theta), std::sin(theta)};
    }

    bool is_real() const {
        for (auto k : exponents_)
            if (k > 0 && 2 * static_cast<std::uint64_t>(k) != order_base_)
                return false;
        return true;
    }

    const std::vector<std::int64_t>& exponents() const { return exponents_; }

  private:
    std::uint64_t compute_conductor() const {
        for (std::uint64_t f = 1; f <= modulus_; ++f) {
            if (modulus_ % f)
                continue;
            bool induced = true;
            for (std::uint64_t a = 1; a < modulus_ + 1 && induced; a += f) {
                std::int64_t k = exponents_[a % modulus_];
                if (k > 0)
                    induced = false;
            }
            if (induced)
                return f;
        }
        return modulus_;
    }

    std::uint64_t modulus_;
    std::uint64_t order_base_;
    std::vector<std::int64_t> exponents_;
    std::size_t index_;
    std::uint64_t conductor_ = 1;
    bool principal_ = false;
};

namespace detail {

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    unsigned __int128 r = 1 % m, x = b % m;
    while (e) {
        if (e & 1)
            r = r * x % m;
        x = x * x % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(r);
}

inline std::vector<std::pair<std::uint64_t, int>> trial_factor(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, int>> out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e)
            out.emplace_back(p, e);
    }
    if (n > 1)
        out.emplace_back(n, 1);
    return out;
}

/// Smallest primitive root modulo an odd prime power p^e.
inline std::uint64_t primitive_root_prime_power(std::uint64_t p, std::uint64_t pe) {
    std::uint64_t phi_p = p - 1;
    auto factors = trial_factor(phi_p);
    std::uint64_t g = 2;
    for (;; ++g) {
        bool ok = true;
        for (auto [q, e] : factors)
            if (powmod(g, phi_p / q, p) == 1)
                ok = false;
        if (ok)
            break;
    }
    if (pe > p && powmod(g, p - 1, p * p) == 1)
        g += p;
    return g % pe;
}

/// One cyclic factor of (Z/s)^x: residues mod `modulus` (a prime power),
/// discrete log table into Z/order.
struct CyclicFactor {
    std::uint64_t modulus;
    std::uint64_t order;
    std::vector<std::int64_t> log; // per residue mod `modulus`, -1 if not in this factor's image
};

} // namespace detail

/// All phi(s) characters mod s, index 0 principal, then lexicographic in the
/// exponent vector over the CRT generators: a primitive root for each odd
/// prime power, 3 for 4, and (-1, 5) for 2^k with k >= 3.
inline std::vector<DirichletCharacter> enumerate_characters(std::uint64_t s) {
    if (s == 0)
        throw ArgumentError("character modulus must be >= 1");
    using detail::CyclicFactor;
    std::vector<CyclicFactor> factors;
    for (auto [p, e] : detail::trial_factor(s)) {
        std::uint64_t pe = 1;
        for (int i = 0; i < e; ++i)
            pe *= p;
        if (p == 2) {
            if (e == 1)
                continue;
            if (e == 2) {
                CyclicFactor f{4, 2, std::vector<std::int64_t>(4, -1)};
                f.log[1] = 0;
                f.log[3] = 1;
                factors.push_back(std::move(f));
                continue;
            }
            // a = (-1)^u 5^v mod 2^e
            CyclicFactor sign{pe, 2, std::vector<std::int64_t>(pe, -1)};
            CyclicFactor five{pe, pe / 4, std::vector<std::int64_t>(pe, -1)};
            std::uint64_t x = 1;
            for (std::uint64_t v = 0; v < pe / 4; ++v) {
                sign.log[x] = 0;
                five.log[x] = static_cast<std::int64_t>(v);
                sign.log[pe - x] = 1;
                five.log[pe - x] = static_cast<std::int64_t>(v);
                x = x * 5 % pe;
            }
            factors.push_back(std::move(sign));
            factors.push_back(std::move(five));
            continue;
        }
        std::uint64_t order = pe / p * (p - 1);
        CyclicFactor f{pe, order, std::vector<std::int64_t>(pe, -1)};
        std::uint64_t g = detail::primitive_root_prime_power(p, pe);
        std::uint64_t x = 1;
        for (std::uint64_t i = 0; i < order; ++i) {
            f.log[x] = static_cast<std::int64_t>(i);
            x = static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * g % pe);
        }
        factors.push_back(std::move(f));
    }

    std::uint64_t L = 1;
    for (auto& f : factors)
        L = std::lcm(L, f.order);

    // Per residue: discrete log vector, or coprimality failure.
    std::vector<std::vector<std::int64_t>> logs(s);
    std::vector<bool> unit(s, false);
    for (std::uint64_t a = 0; a < s; ++a) {
        if (std::gcd(a, s) != 1 && s != 1)
            continue;
        unit[a] = true;
        for (auto& f : factors)
            logs[a].push_back(f.log[a % f.modulus]);
    }

    std::vector<DirichletCharacter> out;
    std::vector<std::uint64_t> j(factors.size(), 0);
    std::size_t index = 0;
    for (;;) {
        std::vector<std::int64_t> expo(s, -1);
        for (std::uint64_t a = 0; a < s; ++a) {
            if (!unit[a])
                continue;
            std::uint64_t k = 0;
            for (std::size_t i = 0; i < factors.size(); ++i)
                k = (k + j[i] * static_cast<std::uint64_t>(logs[a][i]) % factors[i].order * (L / factors[i].order)) % L;
            expo[a] = static_cast<std::int64_t>(k);
        }
        out.emplace_back(s, L, std::move(expo), index++);
        bool carry = true;
        for (std::size_t pos = factors.size(); carry && pos > 0;) {
            --pos;
            if (++j[pos] < factors[pos].order)
                carry = false;
            else
                j[pos] = 0;
        }
        if (carry)
            break;
    }
    return out;
}

/// Exact value of sum_a chi1(a) conj(chi2(a)) when it can be certified from
/// the exponent histogram: the number of units if chi1 = chi2, zero if the
/// histogram of k1 - k2 is invariant under a nontrivial rotation.
inline std::optional<std::int64_t> exact_inner_product(const DirichletCharacter& a, const DirichletCharacter& b) {
    if (a.modulus() != b.modulus() || a.order_base() != b.order_base())
        throw ArgumentError("inner product of characters with different moduli");
    std::uint64_t L = a.order_base();
    std::vector<std::int64_t> hist(L, 0);
    std::int64_t units = 0;
    for (std::uint64_t r = 0; r < a.modulus(); ++r) {
        auto ka = a.exponent(r), kb = b.exponent(r);
        if ((ka < 0) != (kb < 0))
            throw ConsistencyError("characters disagree on the unit set");
        if (ka < 0)
            continue;
        ++units;
        hist[static_cast<std::uint64_t>(((ka - kb) % static_cast<std::int64_t>(L) + static_cast<std::int64_t>(L))) % L]++;
    }
    if (hist[0] == units)
        return units;
    for (std::uint64_t t = 1; t < L; ++t) {
        if (L % t)
            continue;
        bool invariant = true;
        for (std::uint64_t i = 0; i < L && invariant; ++i)
            invariant = hist[i] == hist[(i + t) % L];
        if (invariant)
            return 0;
    }
    return std::nullopt;
}

} // namespace mlab::arith
