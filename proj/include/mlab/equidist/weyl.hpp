#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "mlab/error.hpp"
#include "mlab/parallel.hpp"
#include "mlab/phase/phasor.hpp"
#include "mlab/phase/poly_phase.hpp"

namespace mlab::equidist {

using phase::Mod1Ring;
using phase::Phasor;

/// Finite sequence x_0..x_{L-1} in (R/Z)^m, every coordinate a residue of one ring.
struct TorusSequence {
    Mod1Ring ring;
    std::size_t dim = 1;
    std::vector<u128> data; // row-major, L * dim

    std::size_t length() const { return dim ? data.size() / dim : 0; }
    const u128* at(std::size_t i) const { return data.data() + i * dim; }

    static TorusSequence from_vec_phase(const phase::VecPolyPhase& f, std::int64_t start, std::int64_t step, std::size_t length) {
        TorusSequence s{f.ring(), f.dim(), {}};
        s.data.reserve(length * f.dim());
        for (std::size_t i = 0; i < length; ++i) {
            std::int64_t n = start + static_cast<std::int64_t>(i) * step;
            for (std::size_t c = 0; c < f.dim(); ++c)
                s.data.push_back(f[c].eval_residue(n));
        }
        return s;
    }
    static TorusSequence from_phase(const phase::PolyPhase& p, std::int64_t start, std::int64_t step, std::size_t length) {
        return from_vec_phase(phase::VecPolyPhase({p}), start, step, length);
    }
};

/// Nonzero k in Z^m with |k|_inf <= K_max and first nonzero entry positive
/// (k and -k give conjugate sums). Lexicographic order.
inline std::vector<std::vector<std::int64_t>> frequencies(std::size_t m, std::int64_t K_max) {
    if (K_max <= 0)
        throw ArgumentError("frequency cutoff K_max must be >= 1");
    if (m == 0)
        return {};
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> k(m, -K_max);
    for (;;) {
        auto first = std::find_if(k.begin(), k.end(), [](std::int64_t v) { return v != 0; });
        if (first != k.end() && *first > 0)
            out.push_back(k);
        std::size_t pos = m;
        while (pos > 0) {
            --pos;
            if (k[pos] < K_max) {
                ++k[pos];
                break;
            }
            k[pos] = -K_max;
            if (pos == 0)
                return out;
        }
    }
}

/// ||e(k.x)||_Lip = 1 + 2 pi |k|_1 for the sup metric on the torus.
inline double lipschitz_norm(const std::vector<std::int64_t>& k) {
    double l1 = 0;
    for (auto v : k)
        l1 += static_cast<double>(v < 0 ? -v : v);
    return 1.0 + 2.0 * std::numbers::pi * l1;
}

/// Phasors of e(k . x_i) for i = 0..L-1.
inline std::vector<Phasor> character_phasors(const TorusSequence& seq, const std::vector<std::int64_t>& k) {
    const auto& ring = seq.ring;
    std::vector<u128> kr;
    for (auto v : k)
        kr.push_back(ring.from_int(v));
    phase::PhasorCache cache(ring);
    std::vector<Phasor> z(seq.length());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const u128* x = seq.at(i);
        u128 acc = 0;
        for (std::size_t c = 0; c < seq.dim; ++c)
            acc = ring.add(acc, ring.mul(kr[c], x[c]));
        z[i] = cache(acc);
    }
    return z;
}

/// Per-(k, step) prefix sums so that any window average
/// (1/len) sum_{j<len} e(k . x_{start + j step}) is one subtraction.
class WeylPrefix {
  public:
    WeylPrefix(const TorusSequence& seq, std::vector<std::vector<std::int64_t>> ks, std::vector<std::size_t> steps)
        : ks_(std::move(ks)), steps_(std::move(steps)), L_(seq.length()) {
        for (const auto& k : ks_) {
            auto z = character_phasors(seq, k);
            for (std::size_t q : steps_) {
                if (q == 0)
                    throw ArgumentError("window step must be >= 1");
                std::vector<Phasor> pre(L_);
                for (std::size_t j = 0; j < L_; ++j)
                    pre[j] = (j >= q ? pre[j - q] : Phasor{}) + z[j];
                prefix_.push_back(std::move(pre));
            }
        }
    }

    /// Exact integer window sum in phasor units.
    Phasor window_sum(std::size_t k_index, std::size_t step_index, std::size_t start, std::size_t length) const {
        std::size_t q = steps_.at(step_index);
        if (length == 0 || start + (length - 1) * q >= L_)
            throw RangeError("window outside the sequence");
        const auto& pre = prefix_[k_index * steps_.size() + step_index];
        Phasor s = pre[start + (length - 1) * q];
        if (start >= q)
            s -= pre[start - q];
        return s;
    }

    std::complex<double> window_average(std::size_t k_index, std::size_t step_index, std::size_t start, std::size_t length) const {
        Phasor s = window_sum(k_index, step_index, start, length);
        double scale = phase::kPhasorScale * static_cast<double>(length);
        return {static_cast<double>(s.re) / scale, static_cast<double>(s.im) / scale};
    }

    const std::vector<std::vector<std::int64_t>>& ks() const { return ks_; }
    const std::vector<std::size_t>& steps() const { return steps_; }

  private:
    std::vector<std::vector<std::int64_t>> ks_;
    std::vector<std::size_t> steps_;
    std::size_t L_;
    std::vector<std::vector<Phasor>> prefix_;
};

struct EquidistOptions {
    double delta = 0.1;
    std::int64_t K_max = 10;
    std::size_t exhaustive_cap = 100'000;
    /// Stop at the first failing window instead of locating the worst one.
    bool early_exit = false;
    /// Above the cap, test a seeded random subset of windows (non-certifying).
    bool sampled = false;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
};

struct EquidistVerdict {
    bool equidistributed = true;
    bool certifying = true;
    bool worst_is_global = true; // false when early_exit stopped the scan
    double delta = 0;
    std::int64_t K_max = 0;
    std::size_t length = 0;
    std::size_t min_window = 0;
    std::size_t max_step = 0;
    std::string mode;
    // witness
    std::size_t start = 0, step = 1, window = 0;
    std::vector<std::int64_t> k;
    double worst_magnitude = 0;  // |average|
    double worst_normalized = 0; // |average| / ||e(k.x)||_Lip
    std::uint64_t windows_tested = 0;
};

inline void to_json(nlohmann::json& j, const EquidistVerdict& v) {
    j = nlohmann::json{{"equidistributed", v.equidistributed},
                       {"certifying", v.certifying},
                       {"worst_is_global", v.worst_is_global},
                       {"delta", v.delta},
                       {"K_max", v.K_max},
                       {"length", v.length},
                       {"min_window", v.min_window},
                       {"max_step", v.max_step},
                       {"mode", v.mode},
                       {"witness", {{"start", v.start}, {"step", v.step}, {"length", v.window}, {"k", v.k}}},
                       {"worst_magnitude", v.worst_magnitude},
                       {"worst_normalized", v.worst_normalized},
                       {"windows_tested", v.windows_tested},
                       {"proxy", "characters |k|_inf <= K_max, threshold delta * (1 + 2 pi |k|_1)"}};
}

namespace detail {

struct Candidate {
    double normalized = -1;
    double magnitude = 0;
    std::size_t k_index = 0, step = 0, start = 0, window = 0;
    std::uint64_t tested = 0;
    bool failed = false;

    auto key() const { return std::make_tuple(k_index, step, start, window); }
    /// Larger normalized wins; ties go to the lexicographically smaller witness.
    bool beats(const Candidate& o) const {
        if (normalized != o.normalized)
            return normalized > o.normalized;
        return key() < o.key();
    }
};

} // namespace detail

/// Sub-progression bounds for total delta-equidistribution on [0, L): windows
/// of length >= ceil(delta L), hence step <= (L-1)/(len-1). When L < 1/delta
/// only the full window is tested.
inline std::pair<std::size_t, std::size_t> window_bounds(std::size_t L, double delta) {
    if (L == 0)
        throw ArgumentError("empty sequence");
    if (!(delta > 0))
        throw ArgumentError("delta must be positive");
    if (static_cast<double>(L) * delta < 1.0)
        return {L, 1};
    auto min_len = static_cast<std::size_t>(std::ceil(delta * static_cast<double>(L) - 1e-12));
    min_len = std::max<std::size_t>(min_len, 1);
    std::size_t max_step = min_len <= 1 ? std::max<std::size_t>(L - 1, 1) : (L - 1) / (min_len - 1);
    return {min_len, std::max<std::size_t>(max_step, 1)};
}

/// Total delta-equidistribution under the character proxy: fails iff some
/// sub-progression A' (|A'| >= delta L) and some k have
/// |E_{A'} e(k.x)| > delta (1 + 2 pi |k|_1).
inline EquidistVerdict test_total_equidistribution(const TorusSequence& seq, const EquidistOptions& opt, const Exec& exec = {}) {
    std::size_t L = seq.length();
    auto [min_len, max_step] = window_bounds(L, opt.delta);
    bool full_only = min_len == L && max_step == 1;
    if (L > opt.exhaustive_cap && !opt.sampled)
        throw ResourceError("sequence length " + std::to_string(L) + " exceeds the exhaustive cap " + std::to_string(opt.exhaustive_cap) +
                            "; enable sampled mode (non-certifying)");
    auto ks = frequencies(seq.dim, opt.K_max);

    EquidistVerdict v;
    v.delta = opt.delta;
    v.K_max = opt.K_max;
    v.length = L;
    v.min_window = min_len;
    v.max_step = max_step;
    v.mode = L > opt.exhaustive_cap ? "sampled" : (full_only ? "full-window" : "exhaustive");
    v.certifying = L <= opt.exhaustive_cap;
    if (seq.dim == 0)
        return v;

    std::vector<detail::Candidate> best(ks.size());
    parallel_for(ks.size(), exec, [&](std::size_t ki) {
        auto z = character_phasors(seq, ks[ki]);
        double lip = lipschitz_norm(ks[ki]);
        double thr = opt.delta * lip; // threshold on |average|
        detail::Candidate& b = best[ki];
        b.k_index = ki;
        auto consider = [&](const Phasor& s, std::size_t q, std::size_t start, std::size_t len) {
            ++b.tested;
            double n2 = static_cast<double>(s.norm2());
            double len_scaled = static_cast<double>(len) * phase::kPhasorScale;
            double mag = std::sqrt(n2) / len_scaled;
            double normalized = mag / lip;
            detail::Candidate c{normalized, mag, ki, q, start, len, 0, mag > thr};
            if (c.beats(b)) {
                c.tested = b.tested;
                b = c;
            }
            return mag > thr;
        };
        if (L > opt.exhaustive_cap) {
            std::mt19937_64 rng(opt.seed + ki);
            std::vector<Phasor> pre;
            for (std::uint64_t t = 0; t < opt.samples; ++t) {
                std::size_t q = 1 + rng() % max_step;
                std::size_t max_len = (L - 1) / q + 1;
                if (max_len < min_len)
                    continue;
                std::size_t len = min_len + rng() % (max_len - min_len + 1);
                std::size_t start = rng() % (L - (len - 1) * q);
                Phasor s{};
                for (std::size_t j = 0; j < len; ++j)
                    s += z[start + j * q];
                if (consider(s, q, start, len) && opt.early_exit)
                    return;
            }
            return;
        }
        if (full_only) {
            Phasor s{};
            for (auto& p : z)
                s += p;
            consider(s, 1, 0, L);
            return;
        }
        std::vector<Phasor> pre;
        for (std::size_t q = 1; q <= max_step; ++q) {
            for (std::size_t r = 0; r < q && r < L; ++r) {
                std::size_t count = (L - r + q - 1) / q;
                if (count < min_len)
                    continue;
                pre.assign(count + 1, Phasor{});
                for (std::size_t i = 0; i < count; ++i)
                    pre[i + 1] = pre[i] + z[r + i * q];
                if (min_len == 1 && q > 1) {
                    // singletons are counted once, under step 1
                }
                for (std::size_t i = 0; i + min_len <= count; ++i) {
                    std::size_t first_len = std::max<std::size_t>(min_len, q > 1 ? 2 : 1);
                    for (std::size_t e = i + first_len; e <= count; ++e) {
                        Phasor s = pre[e] - pre[i];
                        // fast reject against the running best before the exact path
                        double len = static_cast<double>(e - i) * phase::kPhasorScale;
                        double n2 = static_cast<double>(s.norm2());
                        double cut = std::max(0.0, b.normalized) * lip * len;
                        if (n2 < cut * cut && !(n2 > thr * thr * len * len)) {
                            ++b.tested;
                            continue;
                        }
                        if (consider(s, q, r + i * q, e - i) && opt.early_exit)
                            return;
                    }
                }
            }
        }
    });

    detail::Candidate worst;
    std::uint64_t tested = 0;
    bool any_fail = false;
    std::optional<detail::Candidate> first_fail;
    for (const auto& b : best) {
        tested += b.tested;
        if (b.failed || b.normalized > opt.delta) {
            any_fail = true;
            if (!first_fail)
                first_fail = b;
        }
        if (b.beats(worst))
            worst = b;
    }
    const detail::Candidate& w = (opt.early_exit && first_fail) ? *first_fail : worst;
    v.equidistributed = !any_fail;
    v.worst_is_global = !opt.early_exit || !any_fail;
    v.windows_tested = tested;
    if (w.normalized >= 0) {
        v.start = w.start;
        v.step = w.step;
        v.window = w.window;
        v.k = ks[w.k_index];
        v.worst_magnitude = std::min(1.0, w.magnitude);
        v.worst_normalized = std::min(1.0, w.magnitude) / lipschitz_norm(ks[w.k_index]);
    }
    return v;
}

} // namespace mlab::equidist
