#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlab/arith/factor_table.hpp"
#include "mlab/arith/mult_table.hpp"
#include "mlab/error.hpp"
#include "mlab/parallel.hpp"
#include "mlab/phase/diff_table.hpp"
#include "mlab/phase/phasor.hpp"
#include "mlab/phase/poly_phase.hpp"
#include "mlab/summation.hpp"

namespace mlab::averages {

using arith::MultTable;
using phase::Phasor;
using phase::PolyPhase;

enum class Algo : std::uint8_t { fast, brute };

inline std::string to_string(Algo a) { return a == Algo::fast ? "fast" : "brute"; }

struct ShortAPSpec {
    std::uint64_t N = 0;
    std::uint64_t h = 3;
    std::uint64_t s = 1;
    PolyPhase P{std::vector<Rational>{Rational(0)}};
    /// Restrict the outer sum to the single class m = residue (mod s).
    std::optional<std::uint64_t> residue;

    void validate(const MultTable& w) const {
        if (h < 3)
            throw ArgumentError("short AP average needs h >= 3");
        if (s < 1)
            throw ArgumentError("s must be >= 1");
        if (N < 10 * h * s)
            throw ArgumentError("N=" + std::to_string(N) + " below the guard N >= 10*h*s = " + std::to_string(10 * h * s));
        if (residue && *residue >= s)
            throw ArgumentError("residue must lie in [0, s)");
        w.require(N + h * s, "short AP average");
    }

    /// s log h > (1/2) (log N)^{1/32}
    bool outside_regime() const {
        return static_cast<double>(s) * std::log(static_cast<double>(h)) > 0.5 * std::pow(std::log(static_cast<double>(N)), 1.0 / 32.0);
    }
};

/// (s/phi(s)) log log h / log h, or 0 for h < 3.
inline double ap_bound(std::uint64_t h, std::uint64_t s) {
    if (h < 3)
        return 0.0;
    double lh = std::log(static_cast<double>(h));
    return arith::s_over_phi(s) * std::log(lh) / lh;
}

struct AverageReport {
    std::string quantity = "short_ap_average";
    std::uint64_t N = 0, h = 0, s = 0;
    std::string poly;
    std::string weight;
    std::optional<std::uint64_t> residue;
    double value = 0;
    double bound = 0;
    double ratio = 0;
    Algo algo = Algo::fast;
    double seconds = 0;
    bool outside_regime = false;
};

inline void to_json(nlohmann::json& j, const AverageReport& r) {
    j = {{"quantity", r.quantity}, {"N", r.N},         {"h", r.h},         {"s", r.s},
         {"poly", r.poly},         {"weight", r.weight}, {"value", r.value}, {"bound", r.bound},
         {"ratio", r.ratio},       {"algo", to_string(r.algo)}, {"seconds", r.seconds},
         {"outside_paper_regime", r.outside_regime}};
    if (r.residue)
        j["residue"] = *r.residue;
}

inline std::string csv_header() { return "N,h,s,poly,value,bound,ratio,algo,seconds"; }

inline std::string csv_row(const AverageReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.N << ',' << r.h << ',' << r.s << ",\"" << r.poly << "\"," << r.value << ',' << r.bound << ',' << r.ratio << ','
       << to_string(r.algo) << ',' << r.seconds;
    return os.str();
}

namespace detail {

/// Quantized w(m) e(P(m)). Integral weights multiply the lattice phasor
/// exactly; complex weights are rounded to the lattice first.
inline Phasor weighted(const MultTable& w, std::uint64_t m, const phase::PhasorCache& cache, u128 residue) {
    if (w.is_integral()) {
        int v = w.integral(m);
        return v == 0 ? Phasor{} : v * cache(residue);
    }
    std::complex<double> z = w(m);
    if (z == std::complex<double>{})
        return {};
    Phasor q{std::llround(z.real() * phase::kPhasorScale), std::llround(z.imag() * phase::kPhasorScale)};
    return phase::phasor_mul(q, cache(residue));
}

/// Streams t(m) for m = m0, m0+1, ...
class TermStream {
  public:
    TermStream(const MultTable& w, const PolyPhase& P, const phase::PhasorCache& cache, std::uint64_t m0)
        : w_(w), cache_(cache), table_(P, static_cast<std::int64_t>(m0)), m_(m0) {}

    Phasor next() {
        Phasor t = weighted(w_, m_, cache_, table_.value());
        table_.step();
        ++m_;
        return t;
    }

  private:
    const MultTable& w_;
    const phase::PhasorCache& cache_;
    phase::DiffTable table_;
    std::uint64_t m_;
};

/// Drives the shared rolling structure: for each n in [lo, hi], S[c] is the
/// sum of t(m) over m = c (mod s), n < m <= n + hs. Calls emit(n, S).
template <class Emit>
void roll(const MultTable& w, const PolyPhase& P, const phase::PhasorCache& cache, std::uint64_t s, std::uint64_t h,
          std::uint64_t lo, std::uint64_t hi, Emit&& emit) {
    std::vector<Phasor> S(s);
    std::uint64_t hs = h * s;
    TermStream lead(w, P, cache, lo);
    // window for n = lo - 1 is [lo, lo + hs - 1]
    for (std::uint64_t m = lo; m < lo + hs; ++m)
        S[m % s] += lead.next();
    TermStream trail(w, P, cache, lo);
    for (std::uint64_t n = lo; n <= hi; ++n) {
        S[n % s] += lead.next();
        S[n % s] -= trail.next();
        emit(n, S);
    }
}

inline Phasor direct_window(const MultTable& w, const PolyPhase& P, const phase::PhasorCache& cache, std::uint64_t first,
                            std::uint64_t step, std::uint64_t count) {
    Phasor S;
    for (std::uint64_t l = 0; l < count; ++l) {
        std::uint64_t m = first + l * step;
        S += weighted(w, m, cache, P.eval_residue(static_cast<std::int64_t>(m)));
    }
    return S;
}

/// First element of (n, n + hs] congruent to c mod s.
inline std::uint64_t first_in_class(std::uint64_t n, std::uint64_t c, std::uint64_t s) {
    std::uint64_t m = n + 1;
    return m + (c + s - m % s) % s;
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// (1/(N s)) sum_a sum_{n<=N} |(1/h) sum_{m=a(s), n<m<=n+hs} w(m) e(P(m))|.
/// With spec.residue set, only that class is summed and the normalisation is 1/N.
inline AverageReport short_ap_average(const MultTable& w, const ShortAPSpec& spec, Algo algo = Algo::fast, const Exec& exec = {}) {
    spec.validate(w);
    auto t0 = std::chrono::steady_clock::now();
    phase::PhasorCache cache(spec.P.ring());
    const std::uint64_t s = spec.s, h = spec.h;
    auto magnitude = [&](const std::vector<Phasor>& S) {
        if (spec.residue)
            return S[*spec.residue].abs();
        double v = 0;
        for (const auto& x : S)
            v += x.abs();
        return v;
    };
    double total;
    if (algo == Algo::fast) {
        total = blocked_sum<double>(1, spec.N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<double>& acc) {
            detail::roll(w, spec.P, cache, s, h, lo, hi, [&](std::uint64_t, const std::vector<Phasor>& S) { acc.add(magnitude(S)); });
        });
    } else {
        total = blocked_sum<double>(1, spec.N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<double>& acc) {
            std::vector<Phasor> S(s);
            for (std::uint64_t n = lo; n <= hi; ++n) {
                for (std::uint64_t c = 0; c < s; ++c)
                    S[c] = (spec.residue && c != *spec.residue) ? Phasor{}
                                                               : detail::direct_window(w, spec.P, cache, detail::first_in_class(n, c, s), s, h);
                acc.add(magnitude(S));
            }
        });
    }
    double classes = spec.residue ? 1.0 : static_cast<double>(s);
    AverageReport r;
    r.N = spec.N;
    r.h = h;
    r.s = s;
    r.poly = spec.P.literal();
    r.weight = arith::to_string(w.kind());
    r.residue = spec.residue;
    r.value = total / (static_cast<double>(spec.N) * classes * static_cast<double>(h) * phase::kPhasorScale);
    r.bound = ap_bound(h, s);
    r.ratio = r.bound > 0 ? r.value / r.bound : 0.0;
    r.algo = algo;
    r.outside_regime = spec.outside_regime();
    r.seconds = detail::elapsed(t0);
    return r;
}

/// (1/N) sum_{n<=N} |(1/h) sum_{l<=h} w(n+ls) e(P(n+ls))|^2.
inline double self_correlation_average(const MultTable& w, std::uint64_t N, std::uint64_t h, std::uint64_t s, const PolyPhase& P,
                                       Algo algo = Algo::fast, const Exec& exec = {}) {
    if (N < 1 || h < 1 || s < 1)
        throw ArgumentError("self correlation needs N, h, s >= 1");
    w.require(N + h * s, "self correlation average");
    phase::PhasorCache cache(P.ring());
    double total;
    if (algo == Algo::fast) {
        // The window {n+s, ..., n+hs} is the class-(n mod s) part of (n, n+hs].
        total = blocked_sum<double>(1, N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<double>& acc) {
            detail::roll(w, P, cache, s, h, lo, hi,
                         [&](std::uint64_t n, const std::vector<Phasor>& S) { acc.add(static_cast<double>(S[n % s].norm2())); });
        });
    } else {
        total = blocked_sum<double>(1, N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<double>& acc) {
            for (std::uint64_t n = lo; n <= hi; ++n)
                acc.add(static_cast<double>(detail::direct_window(w, P, cache, n + s, s, h).norm2()));
        });
    }
    double scale = static_cast<double>(h) * phase::kPhasorScale;
    return total / (static_cast<double>(N) * scale * scale);
}

struct WindowIdentity {
    double lhs = 0;
    double rhs = 0;
    double discrepancy = 0;
    double scale = 0; // N + h^2 s^2
    bool skipped = false;
    std::string notice;
};

inline void to_json(nlohmann::json& j, const WindowIdentity& r) {
    j = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"discrepancy", r.discrepancy}, {"scale", r.scale}, {"skipped", r.skipped}};
    if (!r.notice.empty())
        j["notice"] = r.notice;
}

/// lhs = sum_{n<=N} |sum_{l<=h} t(n+ls)|,
/// rhs = (1/s) sum_a sum_{x<=N} |sum_{n=a(s), x<n<=x+hs} t(n)|, both unnormalised.
inline WindowIdentity window_identity_check(const MultTable& w, std::uint64_t N, std::uint64_t h, std::uint64_t s, const PolyPhase& P,
                                            const Exec& exec = {}) {
    WindowIdentity r;
    r.scale = static_cast<double>(N) + static_cast<double>(h * h) * static_cast<double>(s * s);
    if (h * s >= N) {
        r.skipped = true;
        r.notice = "h*s >= N: both sides are dominated by the boundary, check skipped";
        return r;
    }
    w.require(N + h * s, "window identity check");
    phase::PhasorCache cache(P.ring());
    double lhs = blocked_sum<double>(1, N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<double>& acc) {
        detail::roll(w, P, cache, s, h, lo, hi, [&](std::uint64_t n, const std::vector<Phasor>& S) { acc.add(S[n % s].abs()); });
    });
    double rhs = blocked_sum<double>(1, N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<double>& acc) {
        detail::roll(w, P, cache, s, h, lo, hi, [&](std::uint64_t, const std::vector<Phasor>& S) {
            double v = 0;
            for (const auto& x : S)
                v += x.abs();
            acc.add(v);
        });
    });
    r.lhs = lhs / phase::kPhasorScale;
    r.rhs = rhs / (static_cast<double>(s) * phase::kPhasorScale);
    r.discrepancy = std::abs(r.lhs - r.rhs);
    return r;
}

struct ChowlaResult {
    std::uint64_t N = 0, h = 0, s = 0;
    std::uint64_t sum_squares = 0;
    double value = 0;
    double prediction = 0; // 6h/pi^2
    double ratio = 0;
};

inline void to_json(nlohmann::json& j, const ChowlaResult& r) {
    j = {{"N", r.N},         {"h", r.h},   {"s", r.s}, {"sum_squares", r.sum_squares}, {"value", r.value}, {"prediction", r.prediction},
         {"ratio", r.ratio}};
}

/// (1/N) sum_{n<=N} |sum_{l<=h} w(n+ls)|^2 for an integral weight, in exact integers.
inline ChowlaResult chowla_probe(const MultTable& w, std::uint64_t N, std::uint64_t h, std::uint64_t s, const Exec& exec = {}) {
    if (!w.is_integral())
        throw ArgumentError("chowla probe needs an integral weight");
    if (N < 1 || h < 1 || s < 1)
        throw ArgumentError("chowla probe needs N, h, s >= 1");
    w.require(N + h * s, "chowla probe");
    constexpr std::uint64_t kChunk = std::uint64_t{1} << 18;
    std::size_t chunks = static_cast<std::size_t>((N + kChunk - 1) / kChunk);
    std::vector<std::uint64_t> parts(chunks, 0);
    parallel_for(chunks, exec, [&](std::size_t c) {
        std::uint64_t lo = 1 + c * kChunk, hi = std::min(N, lo + kChunk - 1);
        std::vector<std::int64_t> S(s, 0);
        for (std::uint64_t m = lo; m < lo + h * s; ++m)
            S[m % s] += w.integral(m);
        std::uint64_t acc = 0;
        for (std::uint64_t n = lo; n <= hi; ++n) {
            S[n % s] += w.integral(n + h * s) - w.integral(n);
            acc += static_cast<std::uint64_t>(S[n % s] * S[n % s]);
        }
        parts[c] = acc;
    });
    ChowlaResult r;
    r.N = N;
    r.h = h;
    r.s = s;
    for (auto p : parts)
        r.sum_squares += p;
    r.value = static_cast<double>(r.sum_squares) / static_cast<double>(N);
    r.prediction = 6.0 * static_cast<double>(h) / (std::numbers::pi * std::numbers::pi);
    r.ratio = r.value / r.prediction;
    return r;
}

/// (1/log N) sum_{n<=N} w(n+h1) w(n+h2) e(P(n)) / n.
inline std::complex<double> log_average_correlation(const MultTable& w, std::uint64_t N, std::uint64_t h1, std::uint64_t h2,
                                                    const PolyPhase& P, const Exec& exec = {}) {
    if (h1 == h2)
        throw ArgumentError("log-averaged correlation requires h1 != h2 (the diagonal is excluded)");
    if (N < 2)
        throw ArgumentError("log-averaged correlation needs N >= 2");
    w.require(N + std::max(h1, h2), "log-averaged correlation");
    using C = std::complex<double>;
    C total = blocked_sum<C>(1, N, exec, [&](std::uint64_t lo, std::uint64_t hi, BlockAccumulator<C>& acc) {
        phase::DiffTable table(P, static_cast<std::int64_t>(lo));
        for (std::uint64_t n = lo; n <= hi; ++n, table.step()) {
            C a = w(n + h1) * w(n + h2);
            if (a == C{}) {
                acc.add(C{});
                continue;
            }
            double theta = 2.0 * std::numbers::pi * P.ring().to_double(table.value());
            acc.add(a * C(std::cos(theta), std::sin(theta)) / static_cast<double>(n));
        }
    });
    return total / std::log(static_cast<double>(N));
}

/// Primes in (P, Q] coprime to s.
inline std::vector<std::uint64_t> prime_set(std::uint64_t P, std::uint64_t Q, std::uint64_t s, const arith::FactorTable& ft) {
    std::vector<std::uint64_t> out;
    for (auto p : ft.primes_up_to(Q))
        if (p > P && s % p != 0)
            out.push_back(p);
    return out;
}

struct RamareResult {
    std::uint64_t window_start = 0, H = 0;
    std::uint64_t in_S_tilde = 0;
    std::uint64_t nonzero = 0;
    double total_error = 0;
    double bound = 0; // H / min P
};

inline void to_json(nlohmann::json& j, const RamareResult& r) {
    j = {{"window_start", r.window_start}, {"H", r.H},
         {"in_S_tilde", r.in_S_tilde},     {"nonzero", r.nonzero},
         {"total_error", r.total_error},   {"bound", r.bound}};
}

/// Pointwise |w(m) - sum_{p in primes, p | m} w(p) w(m/p) / (1 + #{q in primes : q | m/p})| at one m.
inline std::optional<double> ramare_error_at(const MultTable& w, std::uint64_t m, const std::vector<std::uint64_t>& primes,
                                             const arith::FactorTable& ft) {
    auto fac = ft.factorize(m);
    auto in_set = [&](std::uint64_t p) { return std::binary_search(primes.begin(), primes.end(), p); };
    std::complex<double> approx{};
    bool hit = false;
    for (auto [p, e] : fac) {
        if (!in_set(p))
            continue;
        hit = true;
        std::uint64_t l = m / p;
        int count = 0;
        for (auto [q, f] : fac)
            if (in_set(q) && (q != p || e > 1))
                ++count;
        approx += w(p) * w(l) / static_cast<double>(1 + count);
    }
    if (!hit)
        return std::nullopt;
    return std::abs(w(m) - approx);
}

/// Sums the pointwise error over m = n + h, h in [1, H], m having a prime factor in `primes`.
inline RamareResult ramare_decomposition_error(const MultTable& w, std::uint64_t n, std::uint64_t H, std::vector<std::uint64_t> primes,
                                               const arith::FactorTable& ft) {
    if (primes.empty())
        throw ConfigError("Ramare decomposition needs a nonempty prime set");
    std::sort(primes.begin(), primes.end());
    w.require(n + H, "Ramare decomposition");
    if (n + H > ft.n_max())
        throw RangeError("factor table does not cover n + H = " + std::to_string(n + H));
    RamareResult r;
    r.window_start = n;
    r.H = H;
    CompensatedSum<double> acc;
    for (std::uint64_t h = 1; h <= H; ++h) {
        auto e = ramare_error_at(w, n + h, primes, ft);
        if (!e)
            continue;
        ++r.in_S_tilde;
        if (*e != 0)
            ++r.nonzero;
        acc.add(*e);
    }
    r.total_error = acc.value();
    r.bound = static_cast<double>(H) / static_cast<double>(primes.front());
    return r;
}

struct ScanResult {
    std::vector<AverageReport> rows;
    bool decreasing = false;      // value(last h) < value(first h)
    bool ratio_decreasing = false; // same for the ratio
};

inline void to_json(nlohmann::json& j, const ScanResult& r) {
    j = {{"rows", r.rows}, {"decreasing", r.decreasing}, {"ratio_decreasing", r.ratio_decreasing}};
}

inline ScanResult bound_ratio_scan(const MultTable& w, std::uint64_t N, std::uint64_t s, const PolyPhase& P, const std::vector<std::uint64_t>& hs,
                                   const Exec& exec = {}) {
    ScanResult out;
    for (auto h : hs) {
        if (h < 3)
            throw ArgumentError("bound ratio scan needs every h >= 3");
        ShortAPSpec spec;
        spec.N = N;
        spec.h = h;
        spec.s = s;
        spec.P = P;
        out.rows.push_back(short_ap_average(w, spec, Algo::fast, exec));
    }
    if (out.rows.size() >= 2) {
        out.decreasing = out.rows.back().value < out.rows.front().value;
        out.ratio_decreasing = out.rows.back().ratio < out.rows.front().ratio;
    }
    return out;
}

} // namespace mlab::averages
