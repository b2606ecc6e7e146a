#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "mlab/arith/factor_table.hpp"
#include "mlab/error.hpp"

namespace mlab::arith {

enum class MultKind : std::uint8_t { mobius = 0, liouville = 1, custom = 2 };

inline std::string to_string(MultKind k) {
    switch (k) {
    case MultKind::mobius:
        return "mobius";
    case MultKind::liouville:
        return "liouville";
    case MultKind::custom:
        return "custom";
    }
    return "custom";
}

/// Values in {-1, 0, 1} packed two bits each: 00 -> 0, 01 -> 1, 11 -> -1.
class PackedTernary {
  public:
    PackedTernary() = default;
    explicit PackedTernary(std::uint64_t size) : size_(size), words_((size + 31) / 32, 0) {}

    std::uint64_t size() const { return size_; }

    int get(std::uint64_t i) const {
        unsigned bits = static_cast<unsigned>(words_[i >> 5] >> ((i & 31) * 2)) & 3u;
        return bits == 1 ? 1 : (bits == 3 ? -1 : 0);
    }
    void set(std::uint64_t i, int v) {
        std::uint64_t bits = v == 0 ? 0 : (v > 0 ? 1 : 3);
        std::uint64_t shift = (i & 31) * 2;
        words_[i >> 5] = (words_[i >> 5] & ~(std::uint64_t{3} << shift)) | (bits << shift);
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

  private:
    std::uint64_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Values of an arithmetic function on [1, n_max]. Ternary tables (mu, lambda,
/// real characters times mu) are stored packed; small-integer and complex
/// tables are stored plainly. Index 0 is unused and holds 0.
class MultTable {
  public:
    using Storage = std::variant<PackedTernary, std::vector<std::int8_t>, std::vector<std::complex<double>>>;

    MultTable(MultKind kind, std::uint64_t n_max, Storage storage) : kind_(kind), n_max_(n_max), storage_(std::move(storage)) {}

    static MultTable ternary(MultKind kind, std::uint64_t n_max, const std::function<int(std::uint64_t)>& fn) {
        PackedTernary packed(n_max + 1);
        for (std::uint64_t n = 1; n <= n_max; ++n)
            packed.set(n, fn(n));
        return MultTable(kind, n_max, std::move(packed));
    }
    static MultTable small_int(MultKind kind, std::uint64_t n_max, const std::function<int(std::uint64_t)>& fn) {
        std::vector<std::int8_t> v(n_max + 1, 0);
        for (std::uint64_t n = 1; n <= n_max; ++n)
            v[n] = static_cast<std::int8_t>(fn(n));
        return MultTable(kind, n_max, std::move(v));
    }
    static MultTable complex(MultKind kind, std::uint64_t n_max, const std::function<std::complex<double>(std::uint64_t)>& fn) {
        std::vector<std::complex<double>> v(n_max + 1);
        for (std::uint64_t n = 1; n <= n_max; ++n)
            v[n] = fn(n);
        return MultTable(kind, n_max, std::move(v));
    }
    /// The constant function c (c in {0, 1}) as a ternary custom table.
    static MultTable constant(std::uint64_t n_max, int c) {
        return ternary(MultKind::custom, n_max, [c](std::uint64_t) { return c; });
    }

    MultKind kind() const { return kind_; }
    std::uint64_t n_max() const { return n_max_; }
    const Storage& storage() const { return storage_; }

    bool is_ternary() const { return std::holds_alternative<PackedTernary>(storage_); }
    bool is_integral() const { return !std::holds_alternative<std::vector<std::complex<double>>>(storage_); }

    /// Integer value; only for integral tables.
    int integral(std::uint64_t n) const {
        check(n);
        if (auto* p = std::get_if<PackedTernary>(&storage_))
            return p->get(n);
        if (auto* v = std::get_if<std::vector<std::int8_t>>(&storage_))
            return (*v)[n];
        throw ArgumentError("integral value requested from a complex-valued table");
    }

    std::complex<double> operator()(std::uint64_t n) const {
        check(n);
        if (auto* p = std::get_if<PackedTernary>(&storage_))
            return {static_cast<double>(p->get(n)), 0.0};
        if (auto* v = std::get_if<std::vector<std::int8_t>>(&storage_))
            return {static_cast<double>((*v)[n]), 0.0};
        return std::get<std::vector<std::complex<double>>>(storage_)[n];
    }

    /// Unchecked ternary read for hot loops; caller guarantees range and kind.
    int ternary_unchecked(std::uint64_t n) const { return std::get<PackedTernary>(storage_).get(n); }

    void require(std::uint64_t n, const char* what) const {
        if (n > n_max_)
            throw RangeError(std::string(what) + " needs table values up to " + std::to_string(n) + " but n_max=" +
                             std::to_string(n_max_));
    }

  private:
    void check(std::uint64_t n) const {
        if (n < 1 || n > n_max_)
            throw RangeError("n=" + std::to_string(n) + " outside multiplicative table range [1, " + std::to_string(n_max_) + "]");
    }

    MultKind kind_;
    std::uint64_t n_max_;
    Storage storage_;
};

inline MultTable mobius_table(const FactorTable& ft) {
    std::uint64_t n_max = ft.n_max();
    PackedTernary packed(n_max + 1);
    packed.set(1, 1);
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        std::uint64_t p = ft.spf(n);
        std::uint64_t m = n / p;
        packed.set(n, (m % p == 0) ? 0 : -packed.get(m));
    }
    return MultTable(MultKind::mobius, n_max, std::move(packed));
}

inline MultTable liouville_table(const FactorTable& ft) {
    std::uint64_t n_max = ft.n_max();
    PackedTernary packed(n_max + 1);
    packed.set(1, 1);
    for (std::uint64_t n = 2; n <= n_max; ++n)
        packed.set(n, -packed.get(n / ft.spf(n)));
    return MultTable(MultKind::liouville, n_max, std::move(packed));
}

inline int mobius(const FactorTable& ft, std::uint64_t n) {
    int sign = 1;
    for (auto [p, e] : ft.factorize(n)) {
        if (e > 1)
            return 0;
        sign = -sign;
    }
    return sign;
}

inline int liouville(const FactorTable& ft, std::uint64_t n) {
    int omega = 0;
    for (auto [p, e] : ft.factorize(n))
        omega += e;
    return omega % 2 ? -1 : 1;
}

inline std::uint64_t totient(const FactorTable& ft, std::uint64_t n) {
    std::uint64_t phi = n;
    for (auto [p, e] : ft.factorize(n))
        phi = phi / p * (p - 1);
    return phi;
}

/// Euler totient by trial division, for moduli that may exceed any table.
inline std::uint64_t totient(std::uint64_t n) {
    std::uint64_t phi = n;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p)
            continue;
        while (n % p == 0)
            n /= p;
        phi = phi / p * (p - 1);
    }
    if (n > 1)
        phi = phi / n * (n - 1);
    return phi;
}

/// s / phi(s) = prod_{p | s} (1 - 1/p)^{-1}.
inline double s_over_phi(std::uint64_t s) {
    if (s == 0)
        throw ArgumentError("s/phi(s) needs s >= 1");
    return static_cast<double>(s) / static_cast<double>(totient(s));
}

/// beta_1(n) = prod beta(p)^{a_p}: the completely multiplicative function
/// agreeing with beta at primes.
inline MultTable completely_multiplicative_extension(const MultTable& beta, const FactorTable& ft) {
    std::uint64_t n_max = std::min(beta.n_max(), ft.n_max());
    if (beta.is_integral()) {
        auto build = [&](auto& values) {
            values[1] = 1;
            for (std::uint64_t n = 2; n <= n_max; ++n) {
                std::uint64_t p = ft.spf(n);
                values[n] = static_cast<std::int8_t>(beta.integral(p) * values[n / p]);
            }
        };
        std::vector<std::int8_t> v(n_max + 1, 0);
        build(v);
        bool ternary = true;
        for (auto x : v)
            ternary = ternary && x >= -1 && x <= 1;
        if (ternary) {
            PackedTernary packed(n_max + 1);
            for (std::uint64_t n = 1; n <= n_max; ++n)
                packed.set(n, v[n]);
            return MultTable(MultKind::custom, n_max, std::move(packed));
        }
        return MultTable(MultKind::custom, n_max, std::move(v));
    }
    std::vector<std::complex<double>> v(n_max + 1);
    v[1] = 1.0;
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        std::uint64_t p = ft.spf(n);
        v[n] = beta(p) * v[n / p];
    }
    return MultTable(MultKind::custom, n_max, std::move(v));
}

/// alpha = beta * (mu beta_1), so that beta = beta_1 * alpha. alpha is
/// multiplicative with alpha(p^k) = beta(p^k) - beta(p) beta(p^{k-1}); in
/// particular alpha(p) = 0. The reconstruction beta = beta_1 * alpha is
/// re-verified by direct Dirichlet convolution on [1, min(n_max, check_limit)].
inline MultTable dirichlet_convolution_alpha(const MultTable& beta, const FactorTable& ft, std::uint64_t check_limit = 10000) {
    std::uint64_t n_max = std::min(beta.n_max(), ft.n_max());
    MultTable beta1 = completely_multiplicative_extension(beta, ft);
    std::uint64_t lim = std::min(n_max, check_limit);

    auto prime_power_part = [&](std::uint64_t n, std::uint64_t& pk, std::uint64_t& p) {
        p = ft.spf(n);
        pk = 1;
        while (n % p == 0) {
            n /= p;
            pk *= p;
        }
        return n;
    };

    if (beta.is_integral()) {
        std::vector<std::int8_t> a(n_max + 1, 0);
        a[1] = 1;
        for (std::uint64_t n = 2; n <= n_max; ++n) {
            std::uint64_t pk, p;
            std::uint64_t rest = prime_power_part(n, pk, p);
            if (rest == 1)
                a[n] = static_cast<std::int8_t>(beta.integral(pk) - beta.integral(p) * beta.integral(pk / p));
            else
                a[n] = static_cast<std::int8_t>(a[pk] * a[rest]);
        }
        std::vector<int> conv(lim + 1, 0);
        for (std::uint64_t d = 1; d <= lim; ++d) {
            int b1 = beta1.integral(d);
            if (b1 == 0)
                continue;
            for (std::uint64_t m = 1; d * m <= lim; ++m)
                conv[d * m] += b1 * a[m];
        }
        for (std::uint64_t n = 1; n <= lim; ++n)
            if (conv[n] != beta.integral(n))
                throw ConsistencyError("beta != beta_1 * alpha at n=" + std::to_string(n));
        return MultTable(MultKind::custom, n_max, std::move(a));
    }

    std::vector<std::complex<double>> a(n_max + 1);
    a[1] = 1.0;
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        std::uint64_t pk, p;
        std::uint64_t rest = prime_power_part(n, pk, p);
        if (rest == 1)
            a[n] = beta(pk) - beta(p) * beta(pk / p);
        else
            a[n] = a[pk] * a[rest];
    }
    std::vector<std::complex<double>> conv(lim + 1);
    for (std::uint64_t d = 1; d <= lim; ++d) {
        auto b1 = beta1(d);
        for (std::uint64_t m = 1; d * m <= lim; ++m)
            conv[d * m] += b1 * a[m];
    }
    for (std::uint64_t n = 1; n <= lim; ++n)
        if (std::abs(conv[n] - beta(n)) > 1e-9)
            throw ConsistencyError("beta != beta_1 * alpha at n=" + std::to_string(n));
    return MultTable(MultKind::custom, n_max, std::move(a));
}

} // namespace mlab::arith
