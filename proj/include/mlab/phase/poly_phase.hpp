#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mlab/error.hpp"
#include "mlab/int128.hpp"
#include "mlab/phase/mod1.hpp"
#include "mlab/rational.hpp"

namespace mlab::phase {

enum class PhaseMode { rational, fixed127 };

inline std::string to_string(PhaseMode m) { return m == PhaseMode::rational ? "rational" : "fixed127"; }

namespace detail {

/// C(n, k) for small n, k as i128.
inline i128 binom(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    i128 r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

/// S(j, i) * i!: number of surjections from a j-set onto an i-set.
inline i128 surjections(int j, int i) {
    i128 total = 0;
    for (int k = 0; k <= i; ++k) {
        i128 p = 1;
        for (int e = 0; e < j; ++e)
            p = checked_mul(p, i - k);
        i128 term = checked_mul(binom(i, k), p);
        total = (k % 2) ? total - term : total + term;
    }
    return total;
}

/// Signed Stirling numbers of the first kind s(i, j): falling(n, i) = sum_j s(i, j) n^j.
inline std::vector<std::vector<i128>> stirling_first(int d) {
    std::vector<std::vector<i128>> s(d + 1, std::vector<i128>(d + 1, 0));
    s[0][0] = 1;
    for (int i = 1; i <= d; ++i)
        for (int j = 1; j <= i; ++j)
            s[i][j] = checked_sub(s[i - 1][j - 1], checked_mul(i - 1, s[i - 1][j]));
    return s;
}

inline i128 factorial(int n) {
    i128 r = 1;
    for (int i = 2; i <= n; ++i)
        r = checked_mul(r, i);
    return r;
}

} // namespace detail

/// A real polynomial P(n) = sum_i alpha_i n^i, evaluated mod 1 with exact
/// integer arithmetic. RATIONAL mode keeps the exact coefficients and a common
/// denominator D <= 2^63; FIXED127 keeps only fractional parts on the 2^-127
/// grid, and every evaluation is exact for that quantized polynomial.
class PolyPhase {
  public:
    PolyPhase() : PolyPhase(std::vector<Rational>{Rational(0)}) {}

    explicit PolyPhase(std::vector<Rational> coeffs) : mode_(PhaseMode::rational), coeffs_(std::move(coeffs)) {
        if (coeffs_.empty())
            coeffs_.push_back(Rational(0));
        trim_rational();
        i128 D = 1;
        for (const auto& c : coeffs_) {
            D = lcm128(D, c.den());
            if (static_cast<u128>(D) > kMaxRationalDenominator)
                throw PrecisionError("common denominator exceeds 2^63 in RATIONAL mode; use FIXED127");
        }
        ring_ = Mod1Ring(static_cast<u128>(D));
        residues_.reserve(coeffs_.size());
        for (const auto& c : coeffs_)
            residues_.push_back(ring_.from_rational(c));
    }

    /// Rational polynomial with an explicit common modulus (a multiple of every denominator).
    PolyPhase(std::vector<Rational> coeffs, u128 modulus) : PolyPhase(std::move(coeffs)) { rescale(modulus); }

    /// FIXED127 polynomial from residues over 2^127.
    static PolyPhase fixed(std::vector<u128> residues) {
        PolyPhase p;
        p.mode_ = PhaseMode::fixed127;
        p.coeffs_.clear();
        p.ring_ = Mod1Ring(kFixedModulus);
        if (residues.empty())
            residues.push_back(0);
        for (auto& r : residues)
            r &= kFixedModulus - 1;
        p.residues_ = std::move(residues);
        while (p.residues_.size() > 1 && p.residues_.back() == 0)
            p.residues_.pop_back();
        return p;
    }

    /// Nearest FIXED127 polynomial to a rational one.
    static PolyPhase quantized(const std::vector<Rational>& coeffs) {
        std::vector<u128> r;
        for (const auto& c : coeffs)
            r.push_back(Mod1Ring::quantize(c));
        return fixed(std::move(r));
    }

    PhaseMode mode() const { return mode_; }
    const Mod1Ring& ring() const { return ring_; }
    u128 modulus() const { return ring_.modulus(); }
    int degree() const { return static_cast<int>(residues_.size()) - 1; }
    /// Coefficient residues mod M, monomial basis.
    const std::vector<u128>& residues() const { return residues_; }
    /// Exact coefficients; RATIONAL mode only.
    const std::vector<Rational>& coeffs() const {
        require_rational("exact coefficients");
        return coeffs_;
    }

    /// {P(n)} as a residue mod M. Horner in the residue ring.
    u128 eval_residue(std::int64_t n) const {
        u128 x = ring_.from_int(n);
        u128 r = 0;
        for (std::size_t i = residues_.size(); i-- > 0;)
            r = ring_.add(ring_.mul(r, x), residues_[i]);
        return r;
    }

    double eval_mod1(std::int64_t n) const { return ring_.to_double(eval_residue(n)); }

    /// Exact P(n) (RATIONAL mode).
    Rational eval_exact(std::int64_t n) const {
        require_rational("exact evaluation");
        Rational r(0);
        for (std::size_t i = coeffs_.size(); i-- > 0;)
            r = r * Rational(n) + coeffs_[i];
        return r;
    }

    /// Same polynomial over a larger common modulus (a multiple of the current one).
    void rescale(u128 modulus) {
        if (mode_ == PhaseMode::fixed127) {
            if (modulus != kFixedModulus)
                throw ArgumentError("FIXED127 phases cannot be rescaled");
            return;
        }
        if (modulus % ring_.modulus() != 0)
            throw ArgumentError("new modulus must be a multiple of " + mlab::to_string(ring_.modulus()));
        Mod1Ring target(modulus);
        u128 scale = modulus / ring_.modulus();
        for (auto& r : residues_)
            r = r * scale;
        ring_ = target;
    }

    /// Coefficients beta_i with P(n) = sum_i beta_i C(n, i) (RATIONAL, exact).
    std::vector<Rational> binomial_coeffs() const {
        require_rational("exact binomial basis");
        int d = degree();
        std::vector<Rational> beta(d + 1, Rational(0));
        for (int j = 0; j <= d; ++j)
            for (int i = 0; i <= j; ++i)
                beta[i] += coeffs_[j] * Rational(detail::surjections(j, i));
        return beta;
    }

    /// Binomial-basis residues mod M. Exact in both modes: only integer
    /// multiples of the monomial residues are involved.
    std::vector<u128> binomial_residues() const {
        int d = degree();
        std::vector<u128> beta(d + 1, 0);
        for (int j = 0; j <= d; ++j)
            for (int i = 0; i <= j; ++i)
                beta[i] = ring_.add(beta[i], ring_.mul(residues_[j], ring_.from_int(detail::surjections(j, i))));
        return beta;
    }

    /// Inverse of binomial_coeffs (RATIONAL, exact).
    static PolyPhase from_binomial(const std::vector<Rational>& beta) {
        int d = static_cast<int>(beta.size()) - 1;
        auto s = detail::stirling_first(std::max(d, 0));
        std::vector<Rational> alpha(std::max(d, 0) + 1, Rational(0));
        for (int i = 0; i <= d; ++i) {
            Rational scale = beta[i] / Rational(detail::factorial(i));
            for (int j = 0; j <= i; ++j)
                alpha[j] += scale * Rational(s[i][j]);
        }
        return PolyPhase(std::move(alpha));
    }

    /// Forward difference (Delta P)(n) = P(n+1) - P(n).
    PolyPhase forward_difference() const { return compose_affine(1, 1) + scaled(-1); }

    /// n -> P(a + s n), exact (integer binomial expansion).
    PolyPhase compose_affine(std::int64_t a, std::int64_t s) const {
        int d = degree();
        if (mode_ == PhaseMode::rational) {
            std::vector<Rational> out(d + 1, Rational(0));
            for (int j = 0; j <= d; ++j) {
                if (coeffs_[j].is_zero())
                    continue;
                // (a + s n)^j = sum_k C(j,k) a^{j-k} s^k n^k
                for (int k = 0; k <= j; ++k) {
                    i128 c = detail::binom(j, k);
                    for (int e = 0; e < j - k; ++e)
                        c = checked_mul(c, a);
                    for (int e = 0; e < k; ++e)
                        c = checked_mul(c, s);
                    out[k] += coeffs_[j] * Rational(c);
                }
            }
            return PolyPhase(std::move(out));
        }
        std::vector<u128> out(d + 1, 0);
        u128 ar = ring_.from_int(a), sr = ring_.from_int(s);
        for (int j = 0; j <= d; ++j)
            for (int k = 0; k <= j; ++k) {
                u128 c = ring_.from_int(detail::binom(j, k));
                for (int e = 0; e < j - k; ++e)
                    c = ring_.mul(c, ar);
                for (int e = 0; e < k; ++e)
                    c = ring_.mul(c, sr);
                out[k] = ring_.add(out[k], ring_.mul(c, residues_[j]));
            }
        return fixed(std::move(out));
    }

    /// k * P for an integer k.
    PolyPhase scaled(std::int64_t k) const {
        if (mode_ == PhaseMode::rational) {
            std::vector<Rational> out;
            for (const auto& c : coeffs_)
                out.push_back(c * Rational(k));
            return PolyPhase(std::move(out));
        }
        std::vector<u128> out;
        for (auto r : residues_)
            out.push_back(ring_.mul(r, ring_.from_int(k)));
        return fixed(std::move(out));
    }

    friend PolyPhase operator+(const PolyPhase& a, const PolyPhase& b) {
        if (a.mode_ != b.mode_)
            throw ArgumentError("cannot add phases of different modes");
        std::size_t n = std::max(a.residues_.size(), b.residues_.size());
        if (a.mode_ == PhaseMode::rational) {
            std::vector<Rational> out(n, Rational(0));
            for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
                out[i] += a.coeffs_[i];
            for (std::size_t i = 0; i < b.coeffs_.size(); ++i)
                out[i] += b.coeffs_[i];
            return PolyPhase(std::move(out));
        }
        std::vector<u128> out(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = a.ring_.add(i < a.residues_.size() ? a.residues_[i] : 0, i < b.residues_.size() ? b.residues_[i] : 0);
        return fixed(std::move(out));
    }

    /// Equality as maps Z -> R/Z is not tested here; this compares representations.
    friend bool operator==(const PolyPhase& a, const PolyPhase& b) {
        return a.mode_ == b.mode_ && a.ring_ == b.ring_ && a.residues_ == b.residues_ && a.coeffs_ == b.coeffs_;
    }

    /// Literal: "d:c0,c1,...,cd" (RATIONAL, each c an integer or p/q) or
    /// "fx:h0,h1,..." (FIXED127, each h a hex numerator over 2^127).
    std::string literal() const {
        std::ostringstream os;
        if (mode_ == PhaseMode::rational) {
            os << degree() << ':';
            for (std::size_t i = 0; i < coeffs_.size(); ++i)
                os << (i ? "," : "") << coeffs_[i].str();
        } else {
            os << "fx:";
            for (std::size_t i = 0; i < residues_.size(); ++i) {
                os << (i ? "," : "");
                std::uint64_t hi = static_cast<std::uint64_t>(residues_[i] >> 64), lo = static_cast<std::uint64_t>(residues_[i]);
                char buf[40];
                if (hi)
                    std::snprintf(buf, sizeof buf, "%llx%016llx", static_cast<unsigned long long>(hi), static_cast<unsigned long long>(lo));
                else
                    std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(lo));
                os << buf;
            }
        }
        return os.str();
    }

  private:
    void require_rational(const char* what) const {
        if (mode_ != PhaseMode::rational)
            throw ArgumentError(std::string(what) + " requires RATIONAL mode");
    }

    void trim_rational() {
        while (coeffs_.size() > 1 && coeffs_.back().is_zero())
            coeffs_.pop_back();
    }

    PhaseMode mode_ = PhaseMode::rational;
    Mod1Ring ring_;
    std::vector<Rational> coeffs_;
    std::vector<u128> residues_;
};

inline PolyPhase parse_phase(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ArgumentError("phase literal needs 'deg:' or 'fx:' prefix: " + text);
    std::string head = text.substr(0, colon), body = text.substr(colon + 1);
    std::vector<std::string> parts;
    std::stringstream ss(body);
    for (std::string item; std::getline(ss, item, ',');)
        parts.push_back(item);
    if (parts.empty())
        throw ArgumentError("phase literal has no coefficients: " + text);
    if (head == "fx") {
        std::vector<u128> r;
        for (const auto& h : parts) {
            if (h.empty() || h.size() > 32 || h.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
                throw ArgumentError("bad hex127 coefficient '" + h + "'");
            u128 v = 0;
            for (char c : h)
                v = (v << 4) | static_cast<u128>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (std::tolower(c) - 'a' + 10));
            if (v >= kFixedModulus)
                throw ArgumentError("hex127 coefficient '" + h + "' is not below 2^127");
            r.push_back(v);
        }
        return PolyPhase::fixed(std::move(r));
    }
    int d = -1;
    try {
        std::size_t used = 0;
        d = std::stoi(head, &used);
        if (used != head.size())
            d = -1;
    } catch (const std::exception&) {
        d = -1;
    }
    if (d < 0 || static_cast<std::size_t>(d + 1) != parts.size())
        throw ArgumentError("phase literal '" + text + "': degree prefix must equal the coefficient count minus one");
    std::vector<Rational> c;
    for (const auto& p : parts)
        c.push_back(parse_rational(p));
    return PolyPhase(std::move(c));
}

/// FIXED127 residue of the fractional part of sqrt(k), rounded down.
inline u128 fixed_sqrt_frac(unsigned k) {
    using boost::multiprecision::cpp_int;
    cpp_int scaled = cpp_int(k) << 254;
    cpp_int root = boost::multiprecision::sqrt(scaled); // floor(sqrt(k) * 2^127)
    cpp_int mask = (cpp_int(1) << 127) - 1;
    cpp_int frac = root & mask;
    return static_cast<u128>(static_cast<std::uint64_t>(frac >> 64)) << 64 | static_cast<u128>(static_cast<std::uint64_t>(frac & cpp_int(UINT64_MAX)));
}

/// (sqrt(5) - 1) / 2 on the 2^-127 grid, rounded down.
inline u128 fixed_golden() {
    using boost::multiprecision::cpp_int;
    cpp_int root = boost::multiprecision::sqrt(cpp_int(5) << 254);
    cpp_int v = (root - (cpp_int(1) << 127)) / 2;
    return static_cast<u128>(static_cast<std::uint64_t>(v >> 64)) << 64 | static_cast<u128>(static_cast<std::uint64_t>(v & cpp_int(UINT64_MAX)));
}

/// Vector-valued polynomial f: Z -> R^m, all coordinates on one modulus.
class VecPolyPhase {
  public:
    VecPolyPhase() = default;
    explicit VecPolyPhase(std::vector<PolyPhase> coords) : coords_(std::move(coords)) {
        if (coords_.empty())
            throw ArgumentError("vector phase needs m >= 1");
        auto mode = coords_[0].mode();
        u128 M = 1;
        for (const auto& c : coords_) {
            if (c.mode() != mode)
                throw ArgumentError("vector phase coordinates must share one mode");
            if (mode == PhaseMode::rational) {
                M = static_cast<u128>(lcm128(static_cast<i128>(M), static_cast<i128>(c.modulus())));
                if (M > kMaxRationalDenominator)
                    throw PrecisionError("common denominator of vector phase exceeds 2^63; use FIXED127");
            }
        }
        if (mode == PhaseMode::rational)
            for (auto& c : coords_)
                c.rescale(M);
    }

    std::size_t dim() const { return coords_.size(); }
    int degree() const {
        int d = 0;
        for (const auto& c : coords_)
            d = std::max(d, c.degree());
        return d;
    }
    PhaseMode mode() const { return coords_.at(0).mode(); }
    const Mod1Ring& ring() const { return coords_.at(0).ring(); }
    const PolyPhase& operator[](std::size_t i) const { return coords_[i]; }
    const std::vector<PolyPhase>& coords() const { return coords_; }

    std::vector<u128> eval_residue(std::int64_t n) const {
        std::vector<u128> out;
        out.reserve(coords_.size());
        for (const auto& c : coords_)
            out.push_back(c.eval_residue(n));
        return out;
    }

    /// sum_i D_i f_i, a scalar polynomial.
    PolyPhase dot(const std::vector<std::int64_t>& D) const {
        if (D.size() != coords_.size())
            throw ArgumentError("dot product dimension mismatch");
        PolyPhase acc = coords_[0].scaled(D[0]);
        for (std::size_t i = 1; i < coords_.size(); ++i)
            acc = acc + coords_[i].scaled(D[i]);
        return acc;
    }

    std::string literal() const {
        std::string s;
        for (std::size_t i = 0; i < coords_.size(); ++i)
            s += (i ? ";" : "") + coords_[i].literal();
        return s;
    }

  private:
    std::vector<PolyPhase> coords_;
};

/// Coordinates separated by ';'.
inline VecPolyPhase parse_vec_phase(const std::string& text) {
    std::vector<PolyPhase> coords;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ';');)
        coords.push_back(parse_phase(item));
    return VecPolyPhase(std::move(coords));
}

} // namespace mlab::phase
