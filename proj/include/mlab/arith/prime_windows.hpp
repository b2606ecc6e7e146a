#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mlab/arith/factor_table.hpp"
#include "mlab/error.hpp"

namespace mlab::arith {

/// Exponents of the window recursion
///   P_1 = (log H)^p1_log_exponent,  Q_1 = H / (log H)^q1_log_exponent,
///   P_j = exp(j^{growth j} (log Q_1)^{j-1} log P_1),
///   Q_j = exp(j^{growth j + growth_offset} (log Q_1)^j).
/// The asymptotic profile uses p1_log_exponent = 6000 and q1_log_exponent = 4,
/// which leaves no primes at any computable H; the defaults are the desk-scale
/// profile.
struct WindowProfile {
    double p1_log_exponent = 3.0;
    double q1_log_exponent = 1.0;
    double growth = 4.0;
    double growth_offset = 2.0;
    /// When nonzero, J is capped as the largest j with Q_j <= exp(sqrt(log sqrt(N))).
    std::uint64_t cap_n = 0;
    unsigned max_windows = 16;
};

struct PrimeWindow {
    double lo; // P_j
    double hi; // Q_j
    std::vector<std::uint64_t> primes; // primes in [P_j, Q_j] coprime to s
};

/// Windows (P_j, Q_j) with their admissible primes, and the membership test
/// for the dense set S = {n : n has a prime factor in every window}.
class PrimeWindows {
  public:
    PrimeWindows(std::vector<PrimeWindow> windows, std::uint64_t s) : windows_(std::move(windows)), s_(s) {}

    const std::vector<PrimeWindow>& windows() const { return windows_; }
    std::size_t count() const { return windows_.size(); }
    std::uint64_t excluded_modulus() const { return s_; }

    bool in_S(std::uint64_t n, const FactorTable& ft) const {
        auto fac = ft.factorize(n);
        for (const auto& w : windows_) {
            bool hit = false;
            for (auto [p, e] : fac)
                if (static_cast<double>(p) >= w.lo && static_cast<double>(p) <= w.hi && std::gcd(p, s_) == 1) {
                    hit = true;
                    break;
                }
            if (!hit)
                return false;
        }
        return true;
    }

  private:
    std::vector<PrimeWindow> windows_;
    std::uint64_t s_;
};

inline PrimeWindow make_window(double lo, double hi, std::uint64_t s, const FactorTable& ft) {
    if (!(lo < hi))
        throw ConfigError("prime window needs P < Q, got [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    PrimeWindow w{lo, hi, {}};
    std::uint64_t top = static_cast<std::uint64_t>(std::floor(hi));
    if (top > ft.n_max())
        throw RangeError("prime window upper end " + std::to_string(top) + " beyond factor table n_max=" + std::to_string(ft.n_max()));
    for (std::uint64_t p = static_cast<std::uint64_t>(std::max(2.0, std::ceil(lo))); p <= top; ++p)
        if (ft.is_prime(p) && std::gcd(p, s) == 1)
            w.primes.push_back(p);
    return w;
}

/// Explicit window list, e.g. for toy configurations.
inline PrimeWindows prime_windows_from_intervals(const std::vector<std::pair<double, double>>& intervals, std::uint64_t s,
                                                 const FactorTable& ft) {
    std::vector<PrimeWindow> ws;
    for (auto [lo, hi] : intervals) {
        ws.push_back(make_window(lo, hi, s, ft));
        if (ws.back().primes.empty())
            throw ConfigError("prime window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                              "] contains no primes coprime to s; use a scaled profile");
    }
    return PrimeWindows(std::move(ws), s);
}

/// Window recursion for a given H. Windows are generated while Q_j fits in the
/// factor table (and under the optional J cap).
inline PrimeWindows build_prime_windows(std::uint64_t H, std::uint64_t s, const WindowProfile& profile, const FactorTable& ft) {
    if (H < 3)
        throw ArgumentError("prime windows need H >= 3");
    double logH = std::log(static_cast<double>(H));
    double P1 = std::pow(logH, profile.p1_log_exponent);
    double Q1 = static_cast<double>(H) / std::pow(logH, profile.q1_log_exponent);
    double logP1 = std::log(P1), logQ1 = std::log(Q1);
    double cap = profile.cap_n ? std::exp(std::sqrt(std::log(std::sqrt(static_cast<double>(profile.cap_n))))) : HUGE_VAL;

    std::vector<PrimeWindow> ws;
    for (unsigned j = 1; j <= profile.max_windows; ++j) {
        double jd = j;
        double P = j == 1 ? P1 : std::exp(std::pow(jd, profile.growth * jd) * std::pow(logQ1, jd - 1) * logP1);
        double Q = j == 1 ? Q1 : std::exp(std::pow(jd, profile.growth * jd + profile.growth_offset) * std::pow(logQ1, jd));
        if (Q > cap || Q > static_cast<double>(ft.n_max()) || !std::isfinite(Q))
            break;
        if (!(P < Q))
            throw ConfigError("window " + std::to_string(j) + " is empty (P_j=" + std::to_string(P) + " >= Q_j=" + std::to_string(Q) +
                              "); use a scaled profile");
        ws.push_back(make_window(P, Q, s, ft));
        if (ws.back().primes.empty())
            throw ConfigError("window " + std::to_string(j) + " has no primes coprime to s; use a scaled profile");
    }
    if (ws.empty())
        throw ConfigError("no prime window fits at H=" + std::to_string(H) + " (Q_1=" + std::to_string(Q1) +
                          "); use a scaled profile or a larger table");
    return PrimeWindows(std::move(ws), s);
}

/// n has a prime factor p in (P, Q] with p coprime to s.
inline bool in_S_tilde(std::uint64_t n, double P, double Q, std::uint64_t s, const FactorTable& ft) {
    for (auto [p, e] : ft.factorize(n))
        if (static_cast<double>(p) > P && static_cast<double>(p) <= Q && std::gcd(p, s) == 1)
            return true;
    return false;
}

/// Shape of the fundamental-sieve bound for the density of integers with no
/// prime factor in a window: log P / log Q * prod_{p | s, P < p <= Q} (1 - 1/p)^{-1}.
inline double sieve_bound_shape(double P, double Q, std::uint64_t s) {
    double v = std::log(P) / std::log(Q);
    std::uint64_t m = s;
    for (std::uint64_t p = 2; p * p <= m; ++p) {
        if (m % p)
            continue;
        while (m % p == 0)
            m /= p;
        if (static_cast<double>(p) > P && static_cast<double>(p) <= Q)
            v /= 1.0 - 1.0 / static_cast<double>(p);
    }
    if (m > 1 && static_cast<double>(m) > P && static_cast<double>(m) <= Q)
        v /= 1.0 - 1.0 / static_cast<double>(m);
    return v;
}

} // namespace mlab::arith
