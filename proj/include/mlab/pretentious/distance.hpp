#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlab/arith/characters.hpp"
#include "mlab/arith/factor_table.hpp"
#include "mlab/arith/mult_table.hpp"
#include "mlab/error.hpp"
#include "mlab/parallel.hpp"
#include "mlab/summation.hpp"

namespace mlab::pretentious {

using arith::FactorTable;
using arith::MultTable;

/// Grid points times primes above which m_s refuses to run.
inline constexpr double kGridBudget = 2e10;
inline constexpr double kDefaultSpacingConstant = 0.5;

inline std::vector<std::uint64_t> primes_coprime(const FactorTable& ft, std::uint64_t X, std::uint64_t s) {
    if (X > ft.n_max())
        throw RangeError("prime cutoff X=" + std::to_string(X) + " beyond factor table n_max=" + std::to_string(ft.n_max()));
    std::vector<std::uint64_t> out;
    for (auto p : ft.primes_up_to(X))
        if (s % p != 0)
            out.push_back(p);
    return out;
}

/// sum_{p <= X, p does not divide s} (1 - Re f(p) conj(g(p))) / p
inline double distance_squared(const MultTable& f, const MultTable& g, std::uint64_t X, std::uint64_t s, const FactorTable& ft) {
    if (s < 1)
        throw ArgumentError("s must be >= 1");
    f.require(std::max<std::uint64_t>(X, 1), "distance");
    g.require(std::max<std::uint64_t>(X, 1), "distance");
    CompensatedSum<double> acc;
    for (auto p : primes_coprime(ft, X, s))
        acc.add((1.0 - (f(p) * std::conj(g(p))).real()) / static_cast<double>(p));
    return acc.value();
}

inline double distance(const MultTable& f, const MultTable& g, std::uint64_t X, std::uint64_t s, const FactorTable& ft) {
    return std::sqrt(std::max(0.0, distance_squared(f, g, X, s, ft)));
}

/// Grid minimum of D_s(f chi, n^{it}; X)^2: an upper bound for the infimum.
struct MResult {
    double value = std::numeric_limits<double>::infinity();
    std::uint64_t X = 0;
    double T = 0;
    double spacing = 0;
    std::uint64_t Y = 0; // 0 for a single modulus
    std::uint64_t s = 1;
    std::size_t chi_index = 0;
    double t = 0;
    std::uint64_t grid_points = 0;
};

inline void to_json(nlohmann::json& j, const MResult& r) {
    j = {{"M", r.value},         {"X", r.X},           {"T", r.T}, {"grid_spacing", r.spacing}, {"Y", r.Y},
         {"s", r.s},             {"chi_index", r.chi_index}, {"t", r.t}, {"grid_points", r.grid_points},
         {"kind", "grid minimum (upper bound for the infimum)"}};
}

inline std::string csv_header() { return "f,X,T,Y,s*,chi_index,t*,M,grid_spacing"; }

inline std::string csv_row(const std::string& f, const MResult& r) {
    std::ostringstream os;
    os.precision(17);
    os << f << ',' << r.X << ',' << r.T << ',' << r.Y << ',' << r.s << ',' << r.chi_index << ',' << r.t << ',' << r.value << ','
       << r.spacing;
    return os.str();
}

inline double default_spacing(std::uint64_t X) { return kDefaultSpacingConstant / std::log(static_cast<double>(std::max<std::uint64_t>(X, 3))); }

/// M_s(f; X, T) over t = k * spacing, |t| <= T, and all characters mod s.
inline MResult m_s(const MultTable& f, std::uint64_t X, std::uint64_t s, double T, double spacing, const FactorTable& ft,
                   const Exec& exec = {}) {
    if (s < 1)
        throw ArgumentError("s must be >= 1");
    if (!(spacing > 0) || !(T >= 0))
        throw ArgumentError("t-grid needs spacing > 0 and T >= 0");
    f.require(std::max<std::uint64_t>(X, 1), "M_s");
    auto primes = primes_coprime(ft, X, s);
    auto chars = arith::enumerate_characters(s);
    auto K = static_cast<std::int64_t>(std::floor(T / spacing));
    std::size_t nt = static_cast<std::size_t>(2 * K + 1);
    double work = static_cast<double>(nt) * static_cast<double>(chars.size()) * static_cast<double>(primes.size());
    if (work > kGridBudget)
        throw ResourceError("t-grid of " + std::to_string(nt) + " points x " + std::to_string(chars.size()) + " characters x " +
                            std::to_string(primes.size()) + " primes exceeds the grid budget");
    std::vector<std::complex<double>> fp(primes.size());
    std::vector<double> logp(primes.size()), invp(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
        fp[i] = f(primes[i]);
        logp[i] = std::log(static_cast<double>(primes[i]));
        invp[i] = 1.0 / static_cast<double>(primes[i]);
    }
    std::vector<double> values(chars.size() * nt);
    parallel_for(chars.size(), exec, [&](std::size_t c) {
        std::vector<std::complex<double>> z(primes.size());
        for (std::size_t i = 0; i < primes.size(); ++i)
            z[i] = fp[i] * chars[c](primes[i]);
        for (std::size_t k = 0; k < nt; ++k) {
            double t = static_cast<double>(static_cast<std::int64_t>(k) - K) * spacing;
            CompensatedSum<double> acc;
            for (std::size_t i = 0; i < primes.size(); ++i) {
                double th = t * logp[i];
                // Re(z e^{-i th})
                acc.add((1.0 - (z[i].real() * std::cos(th) + z[i].imag() * std::sin(th))) * invp[i]);
            }
            values[c * nt + k] = acc.value();
        }
    });
    MResult r;
    r.X = X;
    r.T = T;
    r.spacing = spacing;
    r.s = s;
    r.grid_points = values.size();
    for (std::size_t c = 0; c < chars.size(); ++c)
        for (std::size_t k = 0; k < nt; ++k)
            if (values[c * nt + k] < r.value) {
                r.value = values[c * nt + k];
                r.chi_index = c;
                r.t = static_cast<double>(static_cast<std::int64_t>(k) - K) * spacing;
            }
    return r;
}

inline MResult m_s(const MultTable& f, std::uint64_t X, std::uint64_t s, double T, const FactorTable& ft, const Exec& exec = {}) {
    return m_s(f, X, s, T, default_spacing(X), ft, exec);
}

/// M(f; X, T, Y) = min over s <= Y of M_s; ties go to the smallest s.
inline MResult m_global(const MultTable& f, std::uint64_t X, double T, std::uint64_t Y, double spacing, const FactorTable& ft,
                        const Exec& exec = {}) {
    if (Y < 1)
        throw ArgumentError("Y must be >= 1");
    MResult best;
    std::uint64_t points = 0;
    for (std::uint64_t s = 1; s <= Y; ++s) {
        auto r = m_s(f, X, s, T, spacing, ft, exec);
        points += r.grid_points;
        if (r.value < best.value)
            best = r;
    }
    best.Y = Y;
    best.grid_points = points;
    return best;
}

inline MResult m_global(const MultTable& f, std::uint64_t X, double T, std::uint64_t Y, const FactorTable& ft, const Exec& exec = {}) {
    return m_global(f, X, T, Y, default_spacing(X), ft, exec);
}

struct ProbeRow {
    std::uint64_t X = 0;
    MResult M;
    double third_loglog = 0; // (1/3) log log X
};

struct ProbeResult {
    std::vector<ProbeRow> rows;
    bool increasing = true;
};

inline void to_json(nlohmann::json& j, const ProbeRow& r) { j = {{"X", r.X}, {"M", r.M}, {"third_loglog", r.third_loglog}}; }
inline void to_json(nlohmann::json& j, const ProbeResult& r) { j = {{"rows", r.rows}, {"increasing", r.increasing}}; }

inline ProbeResult nonpretentious_probe(const MultTable& f, const std::vector<std::uint64_t>& Xs, double T, std::uint64_t Y,
                                        const FactorTable& ft, const Exec& exec = {}) {
    ProbeResult out;
    for (auto X : Xs) {
        ProbeRow row;
        row.X = X;
        row.M = m_global(f, X, T, Y, ft, exec);
        row.third_loglog = std::log(std::log(static_cast<double>(X))) / 3.0;
        if (!out.rows.empty() && !(row.M.value > out.rows.back().M.value))
            out.increasing = false;
        out.rows.push_back(row);
    }
    return out;
}

} // namespace mlab::pretentious
