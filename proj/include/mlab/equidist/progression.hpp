#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "mlab/equidist/certificates.hpp"
#include "mlab/equidist/weyl.hpp"
#include "mlab/error.hpp"
#include "mlab/parallel.hpp"

namespace mlab::equidist {

struct ProgressionOptions {
    std::int64_t K_max = 3;
    double c_H = 1.0;           // require H >= R_tilde^c_H
    std::int64_t Q_max = 10;    // search radius for Q
    std::uint64_t max_N = 1000; // exhaustive (n, a) coverage limits
    std::uint64_t max_H = 1000;
    std::uint64_t max_s = 50;
};

struct QCertificate {
    std::vector<std::int64_t> Q;
    /// max_l ||s Q . alpha_l|| H N^(l-1), exact as numer / modulus
    cpp_int numer = 0;
    u128 modulus = 1;
    std::vector<double> per_degree; // ||s Q . alpha_l|| for l = 1..d
    double bound() const {
        return static_cast<double>(boost::multiprecision::cpp_bin_float_100(numer) / boost::multiprecision::cpp_bin_float_100(to_cpp(modulus)));
    }
};

struct ProgressionResult {
    std::uint64_t N = 0, H = 0, s = 0;
    double R_tilde = 0;
    std::uint64_t exceptional = 0;
    double threshold = 0; // R_tilde^-1 N s
    bool structured = false; // count exceeded the threshold
    std::optional<QCertificate> certificate;
    /// verdict per t = n + a, index t - 2
    std::vector<bool> t_equidistributed;
};

inline void to_json(nlohmann::json& j, const ProgressionResult& r) {
    j = nlohmann::json{{"N", r.N},
                       {"H", r.H},
                       {"s", r.s},
                       {"R_tilde", r.R_tilde},
                       {"exceptional_pairs", r.exceptional},
                       {"threshold", r.threshold},
                       {"branch", r.structured ? "structured" : "equidistributed"}};
    if (r.certificate)
        j["certificate"] = {{"Q", r.certificate->Q}, {"bound", r.certificate->bound()}, {"per_degree", r.certificate->per_degree}};
    else
        j["certificate"] = nullptr;
}

/// max_l ||s Q . alpha_l|| H N^(l-1) over the monomial coefficients alpha_l, l >= 1.
inline QCertificate q_bound(const VecPolyPhase& f, const std::vector<std::int64_t>& Q, std::uint64_t N, std::uint64_t H, std::uint64_t s) {
    const auto& ring = f.ring();
    QCertificate c;
    c.Q = Q;
    c.modulus = ring.modulus();
    int d = f.degree();
    cpp_int scale = H;
    for (int l = 1; l <= d; ++l) {
        u128 acc = 0;
        for (std::size_t i = 0; i < f.dim(); ++i) {
            const auto& res = f[i].residues();
            if (static_cast<std::size_t>(l) < res.size())
                acc = ring.add(acc, ring.mul(ring.from_int(static_cast<i128>(s) * Q[i]), res[l]));
        }
        u128 dist = ring.dist_residue(acc);
        c.per_degree.push_back(ring.to_double(dist));
        cpp_int v = scale * to_cpp(dist);
        if (v > c.numer)
            c.numer = v;
        scale *= N;
    }
    return c;
}

/// Dichotomy on g(n, h) = f(n + h): counts (n, a) in [N] x [s] whose sequence
/// (f(n + a + l s))_{0 <= l < H} fails total R_tilde^-1-equidistribution; above
/// R_tilde^-1 N s, searches Q minimizing the Q-bound.
inline ProgressionResult progression_weyl_analysis(const VecPolyPhase& f, std::uint64_t N, std::uint64_t H, std::uint64_t s, double R_tilde,
                                                   const ProgressionOptions& opt = {}, const Exec& exec = {}) {
    if (N < 1 || H < 1 || s < 1)
        throw ArgumentError("N, H and s must be >= 1");
    if (!(R_tilde > 1))
        throw ArgumentError("R_tilde must exceed 1");
    if (N > opt.max_N || H > opt.max_H || s > opt.max_s)
        throw ResourceError("progression analysis limited to N <= " + std::to_string(opt.max_N) + ", H <= " + std::to_string(opt.max_H) +
                            ", s <= " + std::to_string(opt.max_s));
    double H_floor = std::pow(R_tilde, opt.c_H);
    if (static_cast<double>(H) < H_floor)
        throw ArgumentError("H = " + std::to_string(H) + " is below the floor R_tilde^c_H = " + std::to_string(H_floor));

    ProgressionResult out;
    out.N = N;
    out.H = H;
    out.s = s;
    out.R_tilde = R_tilde;
    out.threshold = static_cast<double>(N) * static_cast<double>(s) / R_tilde;

    EquidistOptions eo;
    eo.delta = 1.0 / R_tilde;
    eo.K_max = opt.K_max;
    eo.early_exit = true;
    std::size_t T = N + s - 1; // t in [2, N + s]
    std::vector<char> ok(T);
    parallel_for(T, exec, [&](std::size_t i) {
        auto seq = TorusSequence::from_vec_phase(f, static_cast<std::int64_t>(i + 2), static_cast<std::int64_t>(s), H);
        ok[i] = test_total_equidistribution(seq, eo).equidistributed;
    });
    out.t_equidistributed.assign(ok.begin(), ok.end());
    for (std::uint64_t n = 1; n <= N; ++n)
        for (std::uint64_t a = 1; a <= s; ++a)
            out.exceptional += !ok[n + a - 2];

    out.structured = static_cast<double>(out.exceptional) > out.threshold;
    if (out.structured) {
        detail::check_box(f.dim(), opt.Q_max);
        std::optional<QCertificate> best;
        detail::for_each_half_box(f.dim(), opt.Q_max, [&](const std::vector<std::int64_t>& Q) {
            auto c = q_bound(f, Q, N, H, s);
            if (!best || c.numer < best->numer ||
                (c.numer == best->numer && (detail::sup_norm(Q) < detail::sup_norm(best->Q) ||
                                            (detail::sup_norm(Q) == detail::sup_norm(best->Q) && Q < best->Q))))
                best = std::move(c);
        });
        out.certificate = std::move(best);
    }
    return out;
}

} // namespace mlab::equidist
