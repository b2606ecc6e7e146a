#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "json.hpp"
#include "mlab/equidist/smoothness.hpp"
#include "mlab/error.hpp"
#include "mlab/phase/poly_phase.hpp"

namespace mlab::equidist {

using phase::VecPolyPhase;

struct WeylCertificate {
    std::vector<std::int64_t> D;
    SmoothnessNorm norm;
    std::int64_t search_radius = 0;
};

inline void to_json(nlohmann::json& j, const WeylCertificate& c) {
    j = nlohmann::json{{"D", c.D}, {"norm", c.norm.value()}, {"norm_index", c.norm.index}, {"N", c.norm.N}, {"search_radius", c.search_radius}};
}

/// Largest box (number of candidate D) searched before refusing.
inline constexpr std::uint64_t kCertificateBoxCap = 20'000'000;

namespace detail {

inline std::int64_t sup_norm(const std::vector<std::int64_t>& v) {
    std::int64_t m = 0;
    for (auto x : v)
        m = std::max(m, x < 0 ? -x : x);
    return m;
}

/// Calls visit(D) for every D in [-R, R]^m with first nonzero entry positive.
template <class Visit>
void for_each_half_box(std::size_t m, std::int64_t R, Visit&& visit) {
    std::vector<std::int64_t> D(m, -R);
    for (;;) {
        std::size_t f = 0;
        while (f < m && D[f] == 0)
            ++f;
        if (f < m && D[f] > 0)
            visit(static_cast<const std::vector<std::int64_t>&>(D));
        std::size_t pos = m;
        for (;;) {
            if (pos == 0)
                return;
            --pos;
            if (D[pos] < R) {
                ++D[pos];
                break;
            }
            D[pos] = -R;
        }
    }
}

inline void check_box(std::size_t m, std::int64_t R) {
    if (R < 1)
        throw ArgumentError("search radius must be >= 1");
    long double box = std::pow(2.0L * static_cast<long double>(R) + 1.0L, static_cast<long double>(m));
    if (box / 2 > static_cast<long double>(kCertificateBoxCap))
        throw ResourceError("certificate search box (2*" + std::to_string(R) + "+1)^" + std::to_string(m) + " exceeds the cap");
}

/// Better certificate: smaller norm, then smaller |D|_inf, then lexicographic.
inline bool better(const SmoothnessNorm& a, const std::vector<std::int64_t>& Da, const SmoothnessNorm& b,
                   const std::vector<std::int64_t>& Db) {
    if (a < b)
        return true;
    if (b < a)
        return false;
    auto sa = sup_norm(Da), sb = sup_norm(Db);
    if (sa != sb)
        return sa < sb;
    return Da < Db;
}

} // namespace detail

/// Nonzero D (|D|_inf <= D_max) minimizing ||D.f||_{C^inf[N]}; empty when that
/// minimum exceeds threshold.
inline std::optional<WeylCertificate> find_weyl_certificate(const VecPolyPhase& f, std::uint64_t N, double threshold, std::int64_t D_max) {
    if (f.dim() > 4 || f.degree() > 6)
        throw ResourceError("certificate search supports m <= 4 and d <= 6");
    detail::check_box(f.dim(), D_max);
    std::optional<WeylCertificate> best;
    detail::for_each_half_box(f.dim(), D_max, [&](const std::vector<std::int64_t>& D) {
        auto norm = smoothness_norm(f.dot(D), N);
        if (!best || detail::better(norm, D, best->norm, best->D))
            best = WeylCertificate{D, norm, D_max};
    });
    if (best && best->norm.value() > threshold)
        return std::nullopt;
    return best;
}

struct RecurrenceResult {
    std::uint64_t hits = 0;
    std::uint64_t N = 0;
    double hit_fraction = 0;
    std::int64_t search_radius = 0;
    std::optional<WeylCertificate> certificate;
};

inline void to_json(nlohmann::json& j, const RecurrenceResult& r) {
    j = nlohmann::json{{"hits", r.hits}, {"N", r.N}, {"hit_fraction", r.hit_fraction}, {"search_radius", r.search_radius}};
    j["certificate"] = r.certificate ? nlohmann::json(*r.certificate) : nlohmann::json(nullptr);
}

/// Counts n in [1, N] with {f(n)} in [lo, lo + eps) mod 1 (exact). When the
/// hit fraction reaches delta, returns the smallest-norm D with
/// |D| <= ceil(delta^-c).
inline RecurrenceResult recurrence_certificate(const VecPolyPhase& f, std::uint64_t N, const Rational& lo, const Rational& eps, double delta,
                                               double c = 1.0) {
    if (N < 1)
        throw ArgumentError("recurrence count needs N >= 1");
    if (!(eps > Rational(0)) || eps > Rational(1))
        throw ArgumentError("interval length must lie in (0, 1]");
    if (!(delta > 0) || delta > 1)
        throw ArgumentError("delta must lie in (0, 1]");
    const auto& ring = f.ring();
    cpp_int M = to_cpp(ring.modulus());
    Rational l = lo.frac();
    cpp_int ld = to_cpp(l.den()), ln = to_cpp(l.num());
    cpp_int ed = to_cpp(eps.den()), en = to_cpp(eps.num());
    cpp_int period = M * ld;
    // hit iff ((r/M - l) mod 1) < eps, i.e. ((r*ld - ln*M) mod M*ld) * ed < en * M * ld
    cpp_int rhs = en * period;
    RecurrenceResult out;
    out.N = N;
    // m > 1: a hit needs every coordinate in I
    for (std::uint64_t n = 1; n <= N; ++n) {
        bool hit = true;
        for (std::size_t i = 0; i < f.dim() && hit; ++i) {
            cpp_int x = to_cpp(f[i].eval_residue(static_cast<std::int64_t>(n))) * ld - ln * M;
            x %= period;
            if (x < 0)
                x += period;
            hit = x * ed < rhs;
        }
        out.hits += hit;
    }
    out.hit_fraction = static_cast<double>(out.hits) / static_cast<double>(N);
    out.search_radius = static_cast<std::int64_t>(std::ceil(std::pow(delta, -c) - 1e-12));
    if (out.hit_fraction >= delta)
        out.certificate = find_weyl_certificate(f, N, std::numeric_limits<double>::infinity(), out.search_radius);
    return out;
}

} // namespace mlab::equidist
