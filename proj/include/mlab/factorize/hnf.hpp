#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "mlab/error.hpp"
#include "mlab/int128.hpp"
#include "mlab/rational.hpp"

namespace mlab::factorization {

using IntMatrix = std::vector<std::vector<i128>>; // row-major

/// (g, x, y) with a x + b y = g = gcd(a, b) >= 0.
inline std::tuple<i128, i128, i128> ext_gcd(i128 a, i128 b) {
    i128 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        i128 q = old_r / r;
        std::tie(old_r, r) = std::make_tuple(r, old_r - q * r);
        std::tie(old_s, s) = std::make_tuple(s, old_s - q * s);
        std::tie(old_t, t) = std::make_tuple(t, old_t - q * t);
    }
    if (old_r < 0)
        return {-old_r, -old_s, -old_t};
    return {old_r, old_s, old_t};
}

inline i128 gcd_of(const std::vector<i128>& v) {
    i128 g = 0;
    for (auto x : v)
        g = std::get<0>(ext_gcd(g, x));
    return g;
}

/// Unimodular U (r x r) with Q^T U = (g, 0, ..., 0), g = gcd(Q) > 0. Columns
/// 2..r of U are a basis of {z in Z^r : Q.z = 0}; column 1 satisfies Q.u = g.
inline IntMatrix unimodular_completion(const std::vector<i128>& Q) {
    std::size_t r = Q.size();
    if (gcd_of(Q) == 0)
        throw ArgumentError("unimodular completion of the zero vector");
    IntMatrix U(r, std::vector<i128>(r, 0));
    for (std::size_t i = 0; i < r; ++i)
        U[i][i] = 1;
    std::vector<i128> v = Q;
    for (std::size_t j = 1; j < r; ++j) {
        if (v[j] == 0)
            continue;
        auto [g, a, b] = ext_gcd(v[0], v[j]);
        i128 p = v[0] / g, q = v[j] / g;
        for (std::size_t i = 0; i < r; ++i) {
            i128 c0 = U[i][0], cj = U[i][j];
            U[i][0] = a * c0 + b * cj;
            U[i][j] = -q * c0 + p * cj;
        }
        v[0] = g;
        v[j] = 0;
    }
    if (v[0] < 0)
        for (std::size_t i = 0; i < r; ++i)
            U[i][0] = -U[i][0];
    return U;
}

/// Solves A x = b exactly (A square, invertible).
inline std::vector<Rational> solve(const IntMatrix& A, std::vector<Rational> b) {
    std::size_t n = A.size();
    std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            M[i][j] = Rational(A[i][j]);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && M[p][c].is_zero())
            ++p;
        if (p == n)
            throw ArgumentError("singular matrix");
        std::swap(M[p], M[c]);
        std::swap(b[p], b[c]);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || M[i][c].is_zero())
                continue;
            Rational f = M[i][c] / M[c][c];
            for (std::size_t j = c; j < n; ++j)
                M[i][j] -= f * M[c][j];
            b[i] -= f * b[c];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        b[i] /= M[i][i];
    return b;
}

/// Row-style Hermite normal form: upper echelon, positive pivots, entries
/// above each pivot reduced into [0, pivot). Zero rows dropped.
inline IntMatrix hermite_normal_form(IntMatrix A) {
    if (A.empty())
        return A;
    std::size_t rows = A.size(), cols = A[0].size();
    std::size_t pr = 0;
    for (std::size_t c = 0; c < cols && pr < rows; ++c) {
        for (std::size_t i = pr + 1; i < rows; ++i) {
            if (A[i][c] == 0)
                continue;
            auto [g, x, y] = ext_gcd(A[pr][c], A[i][c]);
            i128 p = A[pr][c] / g, q = A[i][c] / g;
            for (std::size_t j = 0; j < cols; ++j) {
                i128 a = A[pr][j], b = A[i][j];
                A[pr][j] = x * a + y * b;
                A[i][j] = -q * a + p * b;
            }
        }
        if (A[pr][c] == 0)
            continue;
        if (A[pr][c] < 0)
            for (auto& e : A[pr])
                e = -e;
        for (std::size_t i = 0; i < pr; ++i) {
            i128 f = floor_div(A[i][c], A[pr][c]);
            if (f != 0)
                for (std::size_t j = 0; j < cols; ++j)
                    A[i][j] -= f * A[pr][j];
        }
        ++pr;
    }
    A.resize(pr);
    return A;
}

} // namespace mlab::factorization
