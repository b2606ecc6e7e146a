#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlab/arith/mult_table.hpp"
#include "mlab/dynamics/flow.hpp"
#include "mlab/error.hpp"
#include "mlab/parallel.hpp"
#include "mlab/phase/diff_table.hpp"
#include "mlab/summation.hpp"

namespace mlab::dynamics {

using arith::MultTable;
using phase::PolyPhase;

namespace detail {

inline constexpr std::uint64_t kChunkLen = kChunkBlocks * kSumBlock;

inline bool has_skew(const System& sys) {
    for (const auto& c : sys.spec().components)
        if (std::holds_alternative<SkewProduct>(c))
            return true;
    return false;
}

/// States T^{first + c * kChunkLen} x0 for every chunk c covering [first, last].
inline std::vector<System::State> chunk_starts(const System& sys, std::uint64_t first, std::uint64_t last) {
    std::uint64_t count = (last - first) / kChunkLen + 1;
    std::vector<System::State> out;
    out.reserve(count);
    if (!has_skew(sys)) {
        for (std::uint64_t c = 0; c < count; ++c)
            out.push_back(sys.jump(sys.initial(), first + c * kChunkLen));
        return out;
    }
    OrbitCursor cur(sys);
    for (std::uint64_t c = 0; c < count; ++c) {
        std::uint64_t target = first + c * kChunkLen;
        while (cur.index() < target)
            cur.step();
        out.push_back(cur.state());
    }
    return out;
}

inline std::complex<double> unit(const Mod1Ring& ring, u128 r) {
    double th = 2.0 * std::numbers::pi * ring.to_double(r);
    return {std::cos(th), std::sin(th)};
}

template <class Weight>
std::complex<double> weighted_orbit_sum(const System& sys, const Observable& F, const MultTable& w, const PolyPhase& P, std::uint64_t N,
                                        const Exec& exec, Weight&& scale) {
    if (N < 1)
        throw ArgumentError("orbit average needs N >= 1");
    w.require(N, "orbit average");
    if (F.arity() > sys.dim())
        throw ArgumentError("observable reads more coordinates than the flow has");
    auto starts = chunk_starts(sys, 1, N);
    using C = std::complex<double>;
    return blocked_sum<C>(1, N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<C>& acc) {
        OrbitCursor cur(sys, starts[(lo - 1) / kChunkLen], lo);
        phase::DiffTable table(P, static_cast<std::int64_t>(lo));
        for (std::uint64_t n = lo; n <= hi; ++n, cur.step(), table.step()) {
            C a = w(n);
            if (a == C{}) {
                acc.add(C{});
                continue;
            }
            acc.add(a * unit(P.ring(), table.value()) * sys.observe(F, cur.state()) * scale(n));
        }
    });
}

/// Reference path: every state from its own jump T^n x0, terms summed by
/// deterministic_sum. Quadratic for skew components; meant for small N.
template <class Weight>
std::complex<double> weighted_orbit_sum_brute(const System& sys, const Observable& F, const MultTable& w, const PolyPhase& P, std::uint64_t N,
                                              Weight&& scale) {
    if (N < 1)
        throw ArgumentError("orbit average needs N >= 1");
    w.require(N, "orbit average");
    using C = std::complex<double>;
    std::vector<C> terms(N);
    for (std::uint64_t n = 1; n <= N; ++n) {
        C a = w(n);
        if (a == C{})
            continue;
        u128 r = P.eval_residue(static_cast<std::int64_t>(n));
        terms[n - 1] = a * unit(P.ring(), r) * sys.observe(F, sys.jump(sys.initial(), n)) * scale(n);
    }
    return deterministic_sum(terms);
}

} // namespace detail

enum class Algo : std::uint8_t { fast, brute };

/// (1/N) sum_{n<=N} w(n) e(P(n)) F(T^n x0).
inline std::complex<double> birkhoff_mu_average(const System& sys, const Observable& F, const MultTable& w, const PolyPhase& P, std::uint64_t N,
                                                const Exec& exec = {}, Algo algo = Algo::fast) {
    auto one = [](std::uint64_t) { return 1.0; };
    auto total = algo == Algo::fast ? detail::weighted_orbit_sum(sys, F, w, P, N, exec, one) : detail::weighted_orbit_sum_brute(sys, F, w, P, N, one);
    return total / static_cast<double>(N);
}

/// (1/log N) sum_{n<=N} w(n) e(P(n)) F(T^n x0) / n.
inline std::complex<double> log_birkhoff_mu_average(const System& sys, const Observable& F, const MultTable& w, const PolyPhase& P,
                                                    std::uint64_t N, const Exec& exec = {}, Algo algo = Algo::fast) {
    if (N < 2)
        throw ArgumentError("logarithmic average needs N >= 2");
    auto inv = [](std::uint64_t n) { return 1.0 / static_cast<double>(n); };
    auto total = algo == Algo::fast ? detail::weighted_orbit_sum(sys, F, w, P, N, exec, inv) : detail::weighted_orbit_sum_brute(sys, F, w, P, N, inv);
    return total / std::log(static_cast<double>(N));
}

/// g(n) = F(T^n x0) for n = 0..count-1.
inline std::vector<std::complex<double>> observe_orbit(const System& sys, const Observable& F, std::uint64_t count) {
    std::vector<std::complex<double>> g;
    g.reserve(count);
    OrbitCursor cur(sys);
    for (std::uint64_t n = 0; n < count; ++n, cur.step())
        g.push_back(sys.observe(F, cur.state()));
    return g;
}

/// (1/N) sum_{n=1..N} |g(n+m) - g(n)|^2 for each shift m.
inline std::vector<double> empirical_rigidity(const std::vector<std::complex<double>>& g, std::uint64_t N, const std::vector<std::uint64_t>& shifts) {
    std::vector<double> out;
    for (auto m : shifts) {
        if (m >= N)
            throw ArgumentError("shift " + std::to_string(m) + " must be below N=" + std::to_string(N));
        if (N + m >= g.size())
            throw RangeError("observed orbit too short for shift " + std::to_string(m));
        CompensatedSum<double> acc;
        for (std::uint64_t n = 1; n <= N; ++n)
            acc.add(std::norm(g[n + m] - g[n]));
        out.push_back(acc.value() / static_cast<double>(N));
    }
    return out;
}

struct RigidityRow {
    std::uint64_t h = 0, s = 0;
    double value = 0;       // (1/h) sum_{l<=h} ||g o T^{ls} - g||^2, empirical
    double s_over_phi = 0;
    double rate = 0;        // (log log h / log h) * s / phi(s)
};

struct RigidityScan {
    std::uint64_t N = 0;
    std::vector<RigidityRow> rows;
};

inline void to_json(nlohmann::json& j, const RigidityRow& r) {
    j = {{"h", r.h}, {"s", r.s}, {"value", r.value}, {"s_over_phi", r.s_over_phi}, {"rate", r.rate}};
}
inline void to_json(nlohmann::json& j, const RigidityScan& r) { j = {{"N", r.N}, {"rows", r.rows}}; }

inline RigidityScan rigidity_rate_scan(const System& sys, const Observable& g, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs,
                                       std::uint64_t N) {
    std::uint64_t reach = 0;
    for (auto [h, s] : pairs) {
        if (h < 3)
            throw ArgumentError("rigidity scan needs h >= 3");
        if (s < 1)
            throw ArgumentError("rigidity scan needs s >= 1");
        reach = std::max(reach, h * s);
    }
    auto values = observe_orbit(sys, g, N + reach + 1);
    RigidityScan out;
    out.N = N;
    for (auto [h, s] : pairs) {
        RigidityRow row;
        row.h = h;
        row.s = s;
        CompensatedSum<double> acc;
        for (std::uint64_t l = 1; l <= h; ++l) {
            CompensatedSum<double> inner;
            for (std::uint64_t n = 1; n <= N; ++n)
                inner.add(std::norm(values[n + l * s] - values[n]));
            acc.add(inner.value() / static_cast<double>(N));
        }
        row.value = acc.value() / static_cast<double>(h);
        row.s_over_phi = arith::s_over_phi(s);
        double lh = std::log(static_cast<double>(h));
        row.rate = std::log(lh) / lh * row.s_over_phi;
        out.rows.push_back(row);
    }
    return out;
}

struct SkewDecomposition {
    std::uint64_t n = 0;
    std::vector<u128> Q_binomial; // Q(n) = q2 * C(n,2) + q1 * C(n,1)
    u128 Q = 0;
    u128 linear = 0;     // b1 * y1(n)
    u128 psi1_sum = 0;   // b2 * (x2 + sum_{j<n} psi1(x1 + j alpha))
    u128 direct = 0;     // <b, T^n x>
    double discrepancy = 0;
    double slack = 0;
};

inline void to_json(nlohmann::json& j, const SkewDecomposition& d) {
    j = {{"n", d.n},
         {"Q_binomial", {mlab::to_string(d.Q_binomial[0]), mlab::to_string(d.Q_binomial[1])}},
         {"discrepancy", d.discrepancy},
         {"slack", d.slack}};
}

/// Splits <b, T^n (x1, x2)> = Q(n) + b1 y1(n) + b2 (x2 + sum_{j<n} psi1(x1 + j alpha))
/// with Q(n) = b2 (c alpha n(n-1)/2 + c n x1), and checks it against the orbit.
inline SkewDecomposition skew_character_decomposition(const System& sys, const std::vector<std::int64_t>& b, std::uint64_t n) {
    const auto& comps = sys.spec().components;
    if (comps.size() != 1 || !std::holds_alternative<SkewProduct>(comps[0]))
        throw ArgumentError("skew decomposition needs a single skew product");
    if (b.size() != 2)
        throw ArgumentError("skew decomposition needs b = (b1, b2)");
    const auto& sk = std::get<SkewProduct>(comps[0]);
    const Mod1Ring& R = sys.ring();
    u128 alpha = sk.alpha.residue(R), x1 = sys.initial()[0], x2 = sys.initial()[1];
    u128 b1 = R.from_int(b[0]), b2 = R.from_int(b[1]), c = R.from_int(sk.psi.c);
    SkewDecomposition d;
    d.n = n;
    u128 q2 = R.mul(b2, R.mul(c, alpha));
    u128 q1 = R.mul(b2, R.mul(c, x1));
    d.Q_binomial = {q2, q1};
    i128 choose2 = static_cast<i128>(n) * static_cast<i128>(n - (n > 0 ? 1 : 0)) / 2;
    d.Q = R.add(R.mul(q2, R.from_int(choose2)), R.mul(q1, R.from_int(static_cast<i128>(n))));
    d.linear = R.mul(b1, R.add(x1, R.mul(R.from_int(static_cast<i128>(n)), alpha)));
    u128 acc = x2, x = x1;
    for (std::uint64_t j = 0; j < n; ++j) {
        if (!sk.psi.zero())
            acc = R.add(acc, sys.psi1_residue(sk.psi, x));
        x = R.add(x, alpha);
    }
    d.psi1_sum = R.mul(b2, acc);
    auto z = sys.jump(sys.initial(), n);
    d.direct = R.add(R.mul(b1, z[0]), R.mul(b2, z[1]));
    u128 diff = R.sub(d.direct, R.add(d.Q, R.add(d.linear, d.psi1_sum)));
    d.discrepancy = R.to_double(R.dist_residue(diff));
    d.slack = sk.psi.zero() ? 0.0 : static_cast<double>(n) * sk.psi.eval_slack() * static_cast<double>(std::abs(b[1]));
    if (d.discrepancy > d.slack)
        throw ConsistencyError("skew decomposition mismatch " + std::to_string(d.discrepancy) + " exceeds slack " + std::to_string(d.slack));
    return d;
}

} // namespace mlab::dynamics
