#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mlab/error.hpp"

namespace mlab::arith {

/// Memory ceiling for sieve-backed tables, in bytes.
struct SieveBudget {
    std::uint64_t max_bytes = std::uint64_t{4} << 30;
};

/// Smallest prime factor of every n in [2, n_max].
class FactorTable {
  public:
    static constexpr std::uint64_t kSegment = std::uint64_t{1} << 18;

    /// Segmented sieve: base primes up to sqrt(n_max), then each segment is
    /// marked by those primes in increasing order so the first mark wins.
    explicit FactorTable(std::uint64_t n_max, SieveBudget budget = {}) : n_max_(n_max) {
        if (n_max < 2)
            throw ArgumentError("factor table needs n_max >= 2");
        if (n_max > 0xFFFFFFFFull)
            throw ResourceError("factor table limited to n_max < 2^32 (32-bit spf storage)");
        std::uint64_t bytes = (n_max + 1) * sizeof(std::uint32_t);
        if (bytes > budget.max_bytes)
            throw ResourceError("factor table for n_max=" + std::to_string(n_max) + " needs " + std::to_string(bytes) +
                                " bytes, over the sieve budget max_bytes=" + std::to_string(budget.max_bytes));
        spf_.assign(n_max + 1, 0);
        spf_[1] = 1;

        std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n_max)));
        while (root * root > n_max)
            --root;
        while ((root + 1) * (root + 1) <= n_max)
            ++root;
        std::vector<std::uint32_t> base;
        {
            std::vector<bool> composite(root + 1, false);
            for (std::uint64_t p = 2; p <= root; ++p) {
                if (composite[p])
                    continue;
                base.push_back(static_cast<std::uint32_t>(p));
                for (std::uint64_t m = p * p; m <= root; m += p)
                    composite[m] = true;
            }
        }
        for (std::uint64_t lo = 2; lo <= n_max; lo += kSegment) {
            std::uint64_t hi = std::min(n_max, lo + kSegment - 1);
            for (std::uint32_t p : base) {
                std::uint64_t pp = std::uint64_t{p} * p;
                if (pp > hi)
                    break;
                std::uint64_t start = std::max(pp, (lo + p - 1) / p * p);
                for (std::uint64_t m = start; m <= hi; m += p)
                    if (spf_[m] == 0)
                        spf_[m] = p;
            }
            for (std::uint64_t m = lo; m <= hi; ++m)
                if (spf_[m] == 0) {
                    spf_[m] = static_cast<std::uint32_t>(m);
                    if (m > 1)
                        ++prime_count_;
                }
        }
    }

    std::uint64_t n_max() const { return n_max_; }

    std::uint32_t spf(std::uint64_t n) const {
        check(n);
        return spf_[n];
    }
    bool is_prime(std::uint64_t n) const { return n >= 2 && spf(n) == n; }
    std::uint64_t prime_count() const { return prime_count_; }

    /// Prime factorization as (p, exponent) pairs, primes increasing.
    std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n) const {
        check(n);
        std::vector<std::pair<std::uint64_t, int>> out;
        while (n > 1) {
            std::uint64_t p = spf_[n];
            int e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
        return out;
    }

    std::vector<std::uint64_t> primes_up_to(std::uint64_t x) const {
        std::vector<std::uint64_t> out;
        if (x > n_max_)
            throw RangeError("prime list requested up to " + std::to_string(x) + " beyond table n_max=" + std::to_string(n_max_));
        for (std::uint64_t n = 2; n <= x; ++n)
            if (spf_[n] == n)
                out.push_back(n);
        return out;
    }

  private:
    void check(std::uint64_t n) const {
        if (n < 1 || n > n_max_)
            throw RangeError("n=" + std::to_string(n) + " outside factor table range [1, " + std::to_string(n_max_) + "]");
    }

    std::uint64_t n_max_;
    std::uint64_t prime_count_ = 0;
    std::vector<std::uint32_t> spf_;
};

} // namespace mlab::arith
