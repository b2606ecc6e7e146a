#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mlab/equidist/progression.hpp"
#include "mlab/error.hpp"
#include "mlab/factorize/hnf.hpp"
#include "mlab/parallel.hpp"
#include "mlab/phase/poly_phase.hpp"

namespace mlab::factorization {

using phase::PolyPhase;
using phase::VecPolyPhase;

struct FactorizeParams {
    double R = 10;
    double B = 1;
    std::uint64_t N = 500, H = 200, s = 1;
    double c_N = 0.5; // N > (H s)^c_N
    double c_H = 1.0; // H > R^c_H, and H >= R_tilde^c_H at every iteration
    double c_W = 0.5; // R_{l+1} = max(R_tilde_l^(1 + c_W), q)
    double c_Q = 2.0; // accept Q when its bound is <= R_tilde^c_Q
    std::int64_t K_max = 3;
    std::int64_t Q_max = 24;
    double C_cert = 4.0;

    void validate(std::size_t m, int d) const {
        if (!(R > 2))
            throw ConfigError("R must exceed 2");
        if (!(B >= 1))
            throw ConfigError("B must be >= 1");
        if (N < 1 || H < 1 || s < 1)
            throw ConfigError("N, H, s must be >= 1");
        if (!(static_cast<double>(N) > std::pow(static_cast<double>(H * s), c_N)))
            throw ConfigError("N must exceed (H s)^c_N");
        if (!(static_cast<double>(H) > std::pow(R, c_H)))
            throw ConfigError("H must exceed R^c_H");
        if (m < 1 || m > 3 || d > 4)
            throw ResourceError("factorization supports 1 <= m <= 3 and d <= 4");
    }
};

inline void to_json(nlohmann::json& j, const FactorizeParams& p) {
    j = nlohmann::json{{"R", p.R},     {"B", p.B},     {"N", p.N},         {"H", p.H},         {"s", p.s},
                       {"c_N", p.c_N}, {"c_H", p.c_H}, {"c_W", p.c_W},     {"c_Q", p.c_Q},     {"K_max", p.K_max},
                       {"Q_max", p.Q_max}, {"C_cert", p.C_cert}};
}

/// coords[i][j]: coefficient of t^j in coordinate i, t = n + h.
using RatPoly = std::vector<std::vector<Rational>>;

struct IterationRecord {
    std::size_t rank = 0;
    double R_tilde = 0;
    std::uint64_t exceptional = 0;
    double threshold = 0;
    bool structured = false;
    std::vector<std::int64_t> Q; // in the coordinates of the current subgroup
    double Q_bound = 0;
    std::uint64_t q = 1;
};

struct Decomposition {
    phase::PhaseMode mode = phase::PhaseMode::rational;
    std::size_t m = 1;
    int d = 0;
    FactorizeParams params;
    std::uint64_t W = 0;
    double kappa = 1; // log W / log R
    std::uint64_t q_base = 1; // minimal period factor
    std::uint64_t q = 1;      // multiple of q_base in (W/2, W]
    IntMatrix basis;          // rows: basis of Gamma' = G' cap Z^m
    IntMatrix basis_hnf;
    VecPolyPhase g, E, gprime, gamma; // polynomials in t = n + h
    std::optional<VecPolyPhase> coords; // g' in the basis, absent when G' = {0}
    std::vector<std::pair<std::uint64_t, std::uint64_t>> good_n; // closed intervals of the set of good n
    std::uint64_t good_count = 0;
    std::vector<IterationRecord> iterations;

    std::size_t rank() const { return basis.size(); }
};

namespace detail {

inline RatPoly zero_poly(std::size_t m, int d) { return RatPoly(m, std::vector<Rational>(static_cast<std::size_t>(d) + 1, Rational(0))); }

inline RatPoly to_rat(const VecPolyPhase& f, int d) {
    RatPoly out;
    for (const auto& c : f.coords()) {
        auto v = c.coeffs();
        v.resize(static_cast<std::size_t>(d) + 1, Rational(0));
        out.push_back(v);
    }
    return out;
}

inline VecPolyPhase to_vec(const RatPoly& p) {
    std::vector<PolyPhase> c;
    for (const auto& row : p)
        c.emplace_back(row);
    return VecPolyPhase(c);
}

inline VecPolyPhase zero_like(const VecPolyPhase& f) {
    std::vector<PolyPhase> c;
    for (std::size_t i = 0; i < f.dim(); ++i)
        c.push_back(f.mode() == phase::PhaseMode::rational ? PolyPhase({Rational(0)}) : PolyPhase::fixed({0}));
    return VecPolyPhase(c);
}

inline std::vector<Rational> eval(const RatPoly& p, const Rational& t) {
    std::vector<Rational> out;
    for (const auto& row : p) {
        Rational r(0);
        for (std::size_t j = row.size(); j-- > 0;)
            r = r * t + row[j];
        out.push_back(r);
    }
    return out;
}

inline std::vector<std::pair<std::uint64_t, std::uint64_t>> runs(const std::vector<char>& good) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (std::size_t i = 0; i < good.size(); ++i) {
        if (!good[i])
            continue;
        if (!out.empty() && out.back().second + 1 == i + 1)
            out.back().second = i + 1;
        else
            out.push_back({i + 1, i + 1});
    }
    return out;
}

/// n in [N] is good when at least (1 - W^(-B/2)) s residues a have an
/// equidistributed progression. ok is indexed by t - 2 = n + a - 2.
inline std::vector<char> good_set(const std::vector<bool>& ok, std::uint64_t N, std::uint64_t s, double W, double B) {
    double need = (1.0 - std::pow(W, -B / 2)) * static_cast<double>(s);
    std::vector<char> good(N);
    for (std::uint64_t n = 1; n <= N; ++n) {
        std::uint64_t cnt = 0;
        for (std::uint64_t a = 1; a <= s; ++a)
            cnt += ok[n + a - 2];
        good[n - 1] = static_cast<double>(cnt) >= need - 1e-9;
    }
    return good;
}

inline equidist::ProgressionResult analyse(const VecPolyPhase& y, const FactorizeParams& p, double R_tilde, const Exec& exec) {
    equidist::ProgressionOptions po;
    po.K_max = p.K_max;
    po.c_H = p.c_H;
    po.Q_max = p.Q_max;
    if (static_cast<double>(p.H) < std::pow(R_tilde, p.c_H))
        throw ConfigError("H = " + std::to_string(p.H) + " is below R_tilde^c_H = " + std::to_string(std::pow(R_tilde, p.c_H)) +
                          " at this iteration; raise H or lower c_W");
    return equidist::progression_weyl_analysis(y, p.N, p.H, p.s, R_tilde, po, exec);
}

} // namespace detail

/// Splits g(n, h) = f(n + h) into E + g' + gamma: E slowly varying in h, g'
/// totally equidistributed in a subtorus G', gamma rational and qs-periodic.
inline Decomposition factorize(const VecPolyPhase& f, const FactorizeParams& params, const Exec& exec = {}) {
    params.validate(f.dim(), f.degree());
    Decomposition dec;
    dec.mode = f.mode();
    dec.m = f.dim();
    dec.d = f.degree();
    dec.params = params;
    dec.g = f;
    const std::size_t m = f.dim();
    const int d = f.degree();
    const auto s = static_cast<i128>(params.s);

    double R_cur = std::ceil(params.R);
    std::uint64_t q_total = 1;
    IntMatrix B(m, std::vector<i128>(m, 0));
    for (std::size_t i = 0; i < m; ++i)
        B[i][i] = 1;
    std::optional<equidist::ProgressionResult> final_analysis;

    if (dec.mode == phase::PhaseMode::fixed127) {
        // only the equidistributed branch is expressible without exact coefficients
        double Rt = std::pow(R_cur, params.B);
        auto a = detail::analyse(f, params, Rt, exec);
        dec.iterations.push_back({m, Rt, a.exceptional, a.threshold, a.structured, {}, 0, 1});
        if (a.structured)
            throw ArgumentError("f is not equidistributed on progressions; the structured branch needs RATIONAL coefficients");
        dec.E = detail::zero_like(f);
        dec.gamma = detail::zero_like(f);
        dec.gprime = f;
        dec.coords = f;
        final_analysis = std::move(a);
    } else {
        RatPoly y = detail::to_rat(f, d);
        RatPoly E = detail::zero_poly(m, d), gamma = detail::zero_poly(m, d);
        while (!B.empty()) {
            std::size_t r = B.size();
            double Rt = std::pow(R_cur, params.B);
            auto a = detail::analyse(detail::to_vec(y), params, Rt, exec);
            IterationRecord rec{r, Rt, a.exceptional, a.threshold, a.structured, {}, 0, 1};
            if (!a.structured) {
                dec.iterations.push_back(rec);
                final_analysis = std::move(a);
                break;
            }
            const auto& cert = *a.certificate;
            rec.Q = cert.Q;
            rec.Q_bound = cert.bound();
            if (rec.Q_bound > std::pow(Rt, params.c_Q)) {
                dec.iterations.push_back(rec);
                throw InconclusiveError("progressions are not equidistributed (" + std::to_string(a.exceptional) + " exceptional pairs > " +
                                        std::to_string(a.threshold) + ") but the best Q within |Q| <= " + std::to_string(params.Q_max) +
                                        " only reaches bound " + std::to_string(rec.Q_bound) + " > R_tilde^c_Q = " +
                                        std::to_string(std::pow(Rt, params.c_Q)));
            }
            std::vector<i128> Q(cert.Q.begin(), cert.Q.end());
            Rational Q2(0);
            for (auto v : Q)
                Q2 += Rational(v * v);
            i128 g = gcd_of(Q);
            IntMatrix U = unimodular_completion(Q);

            // beta_j: nearest point of {x : Q.x in Z/s}; c_j = round(s Q.alpha_j)
            std::vector<i128> c(static_cast<std::size_t>(d) + 1, 0);
            std::vector<std::vector<Rational>> beta(static_cast<std::size_t>(d) + 1, std::vector<Rational>(r, Rational(0)));
            i128 q_l = 1;
            for (int j = 1; j <= d; ++j) {
                Rational qa(0);
                for (std::size_t i = 0; i < r; ++i)
                    qa += Rational(Q[i]) * y[i][j];
                c[j] = (Rational(s) * qa).round();
                Rational shift = (qa - Rational(c[j], s)) / Q2;
                for (std::size_t i = 0; i < r; ++i)
                    beta[j][i] = y[i][j] - shift * Rational(Q[i]);
                q_l = lcm128(q_l, g / gcd128(g, c[j]));
            }
            // tau_j = (q c_j / g) u / (q s), u the first column of U (Q.u = g)
            RatPoly Ey = detail::zero_poly(r, d), Gy = detail::zero_poly(r, d);
            for (std::size_t i = 0; i < r; ++i) {
                Ey[i][0] = y[i][0].frac();
                Gy[i][0] = Rational(y[i][0].floor());
                for (int j = 1; j <= d; ++j) {
                    Ey[i][j] = y[i][j] - beta[j][i];
                    Gy[i][j] = Rational(q_l * c[j] / g * U[i][0], q_l * s);
                }
            }
            for (std::size_t k = 0; k < m; ++k)
                for (int j = 0; j <= d; ++j)
                    for (std::size_t i = 0; i < r; ++i) {
                        E[k][j] += Ey[i][j] * Rational(B[i][k]);
                        gamma[k][j] += Gy[i][j] * Rational(B[i][k]);
                    }
            // remaining part lies in ker Q; change to the kernel basis u_2..u_r
            RatPoly ynew(r - 1, std::vector<Rational>(static_cast<std::size_t>(d) + 1, Rational(0)));
            for (int j = 0; j <= d; ++j) {
                std::vector<Rational> col(r);
                for (std::size_t i = 0; i < r; ++i)
                    col[i] = y[i][j] - Ey[i][j] - Gy[i][j];
                auto z = solve(U, col);
                if (!z[0].is_zero())
                    throw ConsistencyError("remainder left the kernel of Q");
                for (std::size_t k = 1; k < r; ++k)
                    ynew[k - 1][j] = z[k];
            }
            IntMatrix Bnew(r - 1, std::vector<i128>(m, 0));
            for (std::size_t k = 1; k < r; ++k)
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t x = 0; x < m; ++x)
                        Bnew[k - 1][x] += U[i][k] * B[i][x];
            y = std::move(ynew);
            B = std::move(Bnew);
            rec.q = static_cast<std::uint64_t>(q_l);
            dec.iterations.push_back(rec);
            q_total = static_cast<std::uint64_t>(lcm128(static_cast<i128>(q_total), q_l));
            R_cur = std::ceil(std::max({R_cur, std::pow(Rt, 1 + params.c_W), static_cast<double>(q_total)}));
        }
        // g' in ambient coordinates
        RatPoly gp = detail::zero_poly(m, d);
        for (std::size_t k = 0; k < B.size(); ++k)
            for (std::size_t x = 0; x < m; ++x)
                for (int j = 0; j <= d; ++j)
                    gp[x][j] += y[k][j] * Rational(B[k][x]);
        dec.E = detail::to_vec(E);
        dec.gamma = detail::to_vec(gamma);
        dec.gprime = detail::to_vec(gp);
        if (!B.empty())
            dec.coords = detail::to_vec(y);
    }

    dec.basis = B;
    dec.basis_hnf = hermite_normal_form(B);
    dec.W = static_cast<std::uint64_t>(R_cur);
    dec.kappa = std::log(static_cast<double>(dec.W)) / std::log(params.R);
    dec.q_base = q_total;
    if (q_total > dec.W)
        throw ConsistencyError("period factor exceeds W");
    dec.q = q_total * (dec.W / q_total);

    std::vector<char> good;
    if (final_analysis)
        good = detail::good_set(final_analysis->t_equidistributed, params.N, params.s, static_cast<double>(dec.W), params.B);
    else
        good.assign(params.N, 1);
    dec.good_n = detail::runs(good);
    dec.good_count = static_cast<std::uint64_t>(std::count(good.begin(), good.end(), 1));
    return dec;
}

inline void to_json(nlohmann::json& j, const Decomposition& dec) {
    auto mat = [](const IntMatrix& A) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& row : A) {
            nlohmann::json r = nlohmann::json::array();
            for (auto v : row)
                r.push_back(static_cast<std::int64_t>(v));
            out.push_back(r);
        }
        return out;
    };
    nlohmann::json its = nlohmann::json::array();
    for (const auto& it : dec.iterations)
        its.push_back({{"rank", it.rank},
                       {"R_tilde", it.R_tilde},
                       {"exceptional_pairs", it.exceptional},
                       {"threshold", it.threshold},
                       {"structured", it.structured},
                       {"Q", it.Q},
                       {"Q_bound", it.Q_bound},
                       {"q", it.q}});
    j = nlohmann::json{{"mode", phase::to_string(dec.mode)},
                       {"m", dec.m},
                       {"d", dec.d},
                       {"params", dec.params},
                       {"W", dec.W},
                       {"kappa", dec.kappa},
                       {"q", dec.q},
                       {"q_base", dec.q_base},
                       {"subgroup_rank", dec.rank()},
                       {"basis", mat(dec.basis)},
                       {"basis_hnf", mat(dec.basis_hnf)},
                       {"variable", "t = n + h"},
                       {"g", dec.g.literal()},
                       {"E", dec.E.literal()},
                       {"g_prime", dec.gprime.literal()},
                       {"gamma", dec.gamma.literal()},
                       {"good_n", dec.good_n},
                       {"good_count", dec.good_count},
                       {"iterations", its}};
}

struct CertifyReport {
    bool reconstruction = false;
    bool derivative = false;   // (i)
    bool equidistribution = false; // (ii)
    bool periodicity = false;  // (iii)
    double max_step = 0;       // max_t |E(t+1) - E(t)|
    double step_bound = 0;     // C_cert W / (s H)
    std::uint64_t good_count = 0;
    double required_good = 0;  // (1 - W^(-B/2)) N
    std::uint64_t period = 0;  // q_base s
    std::string witness;

    bool ok() const { return reconstruction && derivative && equidistribution && periodicity; }
};

inline void to_json(nlohmann::json& j, const CertifyReport& r) {
    j = nlohmann::json{{"ok", r.ok()},
                       {"reconstruction", r.reconstruction},
                       {"derivative", r.derivative},
                       {"equidistribution", r.equidistribution},
                       {"periodicity", r.periodicity},
                       {"max_step", r.max_step},
                       {"step_bound", r.step_bound},
                       {"good_count", r.good_count},
                       {"required_good", r.required_good},
                       {"period", r.period},
                       {"witness", r.witness}};
}

/// Checks the decomposition: exact reconstruction, the E increment bound,
/// equidistribution of g' on progressions, and qs-periodicity of gamma.
inline CertifyReport check_decomposition(const Decomposition& dec, const Exec& exec = {}) {
    const auto& p = dec.params;
    CertifyReport rep;
    double W = static_cast<double>(dec.W);
    rep.step_bound = p.C_cert * W / (static_cast<double>(p.s) * static_cast<double>(p.H));
    rep.required_good = (1.0 - std::pow(W, -p.B / 2)) * static_cast<double>(p.N);
    rep.period = dec.q_base * p.s;
    auto note = [&](const std::string& w) {
        if (rep.witness.empty())
            rep.witness = w;
    };

    if (dec.mode == phase::PhaseMode::fixed127) {
        rep.reconstruction = true;
        for (std::size_t i = 0; i < dec.m; ++i) {
            const auto& ring = dec.g.ring();
            auto a = dec.E[i].residues(), b = dec.gprime[i].residues(), c = dec.gamma[i].residues(), g = dec.g[i].residues();
            std::size_t L = std::max({a.size(), b.size(), c.size(), g.size()});
            for (auto* v : {&a, &b, &c, &g})
                v->resize(L, 0);
            for (std::size_t j = 0; j < L; ++j)
                if (ring.add(ring.add(a[j], b[j]), c[j]) != g[j]) {
                    rep.reconstruction = false;
                    note("coefficient " + std::to_string(j) + " of coordinate " + std::to_string(i) + " does not reconstruct");
                }
        }
        rep.derivative = true; // E = 0
        rep.periodicity = true; // gamma = 0
    } else {
        int d = dec.d;
        RatPoly E = detail::to_rat(dec.E, d), gp = detail::to_rat(dec.gprime, d), ga = detail::to_rat(dec.gamma, d), g = detail::to_rat(dec.g, d);
        rep.reconstruction = true;
        for (std::size_t i = 0; i < dec.m; ++i)
            for (int j = 0; j <= d; ++j)
                if (E[i][j] + gp[i][j] + ga[i][j] != g[i][j]) {
                    rep.reconstruction = false;
                    note("coefficient " + std::to_string(j) + " of coordinate " + std::to_string(i) + " does not reconstruct");
                }
        // (i) over t = n + h in [2, N + Hs]
        Rational best(0);
        std::uint64_t t_max = p.N + p.H * p.s;
        auto prev = detail::eval(E, Rational(2));
        for (std::uint64_t t = 2; t <= t_max; ++t) {
            auto next = detail::eval(E, Rational(static_cast<i128>(t + 1)));
            Rational n2(0);
            for (std::size_t i = 0; i < dec.m; ++i) {
                Rational dlt = next[i] - prev[i];
                n2 += dlt * dlt;
            }
            if (n2 > best)
                best = n2;
            prev = std::move(next);
        }
        rep.max_step = std::sqrt(best.to_double());
        rep.derivative = rep.max_step <= rep.step_bound;
        if (!rep.derivative)
            note("E increment " + std::to_string(rep.max_step) + " exceeds " + std::to_string(rep.step_bound));
        // (iii) gamma(t + P) - gamma(t) integral for t in one period, P = q_base s and q s
        rep.periodicity = true;
        for (std::uint64_t P : {dec.q_base * p.s, dec.q * p.s}) {
            for (std::uint64_t t = 0; t < P && rep.periodicity; ++t) {
                auto a = detail::eval(ga, Rational(static_cast<i128>(t)));
                auto b = detail::eval(ga, Rational(static_cast<i128>(t + P)));
                for (std::size_t i = 0; i < dec.m; ++i)
                    if (!(b[i] - a[i]).is_integer()) {
                        rep.periodicity = false;
                        note("gamma not " + std::to_string(P) + "-periodic at t = " + std::to_string(t));
                    }
            }
        }
    }

    // (ii)
    std::vector<char> good;
    if (dec.coords) {
        double Rt = std::pow(W, p.B);
        auto a = detail::analyse(*dec.coords, p, Rt, exec);
        good = detail::good_set(a.t_equidistributed, p.N, p.s, W, p.B);
    } else {
        good.assign(p.N, 1);
    }
    rep.good_count = static_cast<std::uint64_t>(std::count(good.begin(), good.end(), 1));
    rep.equidistribution = static_cast<double>(rep.good_count) >= rep.required_good - 1e-9 && detail::runs(good) == dec.good_n;
    if (!rep.equidistribution)
        note("only " + std::to_string(rep.good_count) + " good n, need " + std::to_string(rep.required_good));
    return rep;
}

/// check_decomposition, raising CertificationError with the first witness on failure.
inline CertifyReport certify(const Decomposition& dec, const Exec& exec = {}) {
    auto rep = check_decomposition(dec, exec);
    if (!rep.ok())
        throw CertificationError("certification failed: " + rep.witness);
    return rep;
}

} // namespace mlab::factorization
