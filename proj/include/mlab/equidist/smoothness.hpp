#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "mlab/error.hpp"
#include "mlab/phase/poly_phase.hpp"

namespace mlab::equidist {

using boost::multiprecision::cpp_int;
using phase::PolyPhase;

/// ||f||_{C^inf[N]} = max_{1<=i<=d} N^i ||alpha_i||, alpha_i the binomial
/// coefficients. Held exactly as numer / modulus.
struct SmoothnessNorm {
    std::uint64_t N = 1;
    cpp_int numer = 0; // N^i * dist(alpha_i * M, M Z) at the maximizing i
    u128 modulus = 1;
    int index = 0; // maximizing i (0 when d = 0 or the norm vanishes)

    double value() const {
        return static_cast<double>(boost::multiprecision::cpp_bin_float_100(numer) /
                                   boost::multiprecision::cpp_bin_float_100(cpp_int(modulus)));
    }
    bool is_zero() const { return numer == 0; }

    /// Exact comparison; both norms must share the modulus.
    friend bool operator<(const SmoothnessNorm& a, const SmoothnessNorm& b) {
        if (a.modulus != b.modulus)
            return a.numer * cpp_int(b.modulus) < b.numer * cpp_int(a.modulus);
        return a.numer < b.numer;
    }
};

inline cpp_int to_cpp(u128 v) { return (cpp_int(static_cast<std::uint64_t>(v >> 64)) << 64) | cpp_int(static_cast<std::uint64_t>(v)); }
inline cpp_int to_cpp(i128 v) { return v < 0 ? -to_cpp(static_cast<u128>(-(v + 1)) + 1) : to_cpp(static_cast<u128>(v)); }

/// Smoothness norm from binomial-basis residues. Degree 0 gives 0.
inline SmoothnessNorm smoothness_norm_binomial(const std::vector<u128>& beta, const phase::Mod1Ring& ring, std::uint64_t N) {
    if (N < 1)
        throw ArgumentError("smoothness norm needs N >= 1");
    SmoothnessNorm out;
    out.N = N;
    out.modulus = ring.modulus();
    cpp_int Ni = 1;
    for (std::size_t i = 1; i < beta.size(); ++i) {
        Ni *= N;
        cpp_int v = Ni * to_cpp(ring.dist_residue(beta[i]));
        if (v > out.numer) {
            out.numer = v;
            out.index = static_cast<int>(i);
        }
    }
    return out;
}

inline SmoothnessNorm smoothness_norm(const PolyPhase& p, std::uint64_t N) {
    return smoothness_norm_binomial(p.binomial_residues(), p.ring(), N);
}

} // namespace mlab::equidist
