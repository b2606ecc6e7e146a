#include <gtest/gtest.h>

#include <random>

#include "mlab/factorize/factorize.hpp"
#include "mlab/factorize/hnf.hpp"

using namespace mlab;
using namespace mlab::factorization;
using mlab::phase::PolyPhase;

namespace {

VecPolyPhase scalar(std::vector<Rational> c) { return VecPolyPhase({PolyPhase(std::move(c))}); }

FactorizeParams desk(std::uint64_t N, std::uint64_t H, std::uint64_t s) {
    FactorizeParams p;
    p.N = N;
    p.H = H;
    p.s = s;
    return p;
}

Rational det(std::vector<std::vector<Rational>> M) {
    std::size_t n = M.size();
    Rational d(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && M[p][c].is_zero())
            ++p;
        if (p == n)
            return Rational(0);
        if (p != c) {
            std::swap(M[p], M[c]);
            d = Rational(0) - d;
        }
        d *= M[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            Rational f = M[i][c] / M[c][c];
            for (std::size_t j = c; j < n; ++j)
                M[i][j] -= f * M[c][j];
        }
    }
    return d;
}

// Value of coordinate i of a component at t, from its literal coefficients.
Rational at(const VecPolyPhase& v, std::size_t i, std::int64_t t) { return v[i].eval_exact(t); }

VecPolyPhase random_rational(std::mt19937_64& rng, std::size_t m, int d) {
    std::uniform_int_distribution<int> num(-20, 20), den(1, 12);
    std::vector<PolyPhase> coords;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Rational> c;
        for (int j = 0; j <= d; ++j)
            c.push_back(Rational(num(rng), den(rng)));
        c.back() = c.back().is_zero() ? Rational(1, 5) : c.back();
        coords.emplace_back(c);
    }
    return VecPolyPhase(coords);
}

} // namespace

TEST(Hnf, ExtendedGcd) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 1000; ++t) {
        i128 a = static_cast<i128>(rng() % 2001) - 1000, b = static_cast<i128>(rng() % 2001) - 1000;
        auto [g, x, y] = ext_gcd(a, b);
        EXPECT_EQ(a * x + b * y, g);
        EXPECT_EQ(g, gcd128(a, b));
    }
}

TEST(Hnf, UnimodularCompletion) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 300; ++t) {
        std::size_t r = 1 + t % 4;
        std::vector<i128> Q(r);
        for (auto& q : Q)
            q = static_cast<i128>(rng() % 41) - 20;
        if (gcd_of(Q) == 0)
            Q[0] = 3;
        auto U = unimodular_completion(Q);
        std::vector<std::vector<Rational>> M(r, std::vector<Rational>(r));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                M[i][j] = Rational(U[i][j]);
        Rational dt = det(M);
        EXPECT_TRUE(dt == Rational(1) || dt == Rational(-1));
        for (std::size_t j = 0; j < r; ++j) {
            i128 dot = 0;
            for (std::size_t i = 0; i < r; ++i)
                dot += Q[i] * U[i][j];
            EXPECT_EQ(dot, j == 0 ? gcd_of(Q) : 0);
        }
    }
}

TEST(Hnf, HermiteFormSpansSameLattice) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        std::size_t rows = 1 + t % 3, cols = 3;
        IntMatrix A(rows, std::vector<i128>(cols));
        for (auto& row : A)
            for (auto& e : row)
                e = static_cast<i128>(rng() % 21) - 10;
        auto H = hermite_normal_form(A);
        // echelon shape with positive pivots and reduced entries above them
        std::size_t last = 0;
        for (std::size_t i = 0; i < H.size(); ++i) {
            std::size_t c = 0;
            while (H[i][c] == 0)
                ++c;
            if (i > 0) {
                EXPECT_GT(c, last);
            }
            last = c;
            EXPECT_GT(H[i][c], 0);
            for (std::size_t k = 0; k < i; ++k) {
                EXPECT_GE(H[k][c], 0);
                EXPECT_LT(H[k][c], H[i][c]);
            }
        }
        // every row of A is an integer combination of H rows: solve through the pivots
        for (const auto& row : A) {
            std::vector<i128> rem = row;
            for (const auto& h : H) {
                std::size_t c = 0;
                while (h[c] == 0)
                    ++c;
                ASSERT_EQ(rem[c] % h[c], 0);
                i128 f = rem[c] / h[c];
                for (std::size_t j = 0; j < cols; ++j)
                    rem[j] -= f * h[j];
            }
            for (auto e : rem)
                EXPECT_EQ(e, 0);
        }
    }
}

TEST(Factorize, HalfRotation) {
    auto dec = factorize(scalar({Rational(0), Rational(1, 2)}), desk(50, 50, 1));
    EXPECT_EQ(dec.rank(), 0u);
    EXPECT_EQ(dec.q_base, 2u);
    EXPECT_GT(2 * dec.q, dec.W);
    EXPECT_LE(dec.q, dec.W);
    EXPECT_EQ(dec.q % 2, 0u);
    for (std::int64_t t = -5; t <= 5; ++t) {
        EXPECT_EQ(at(dec.E, 0, t), Rational(0));
        EXPECT_EQ(at(dec.gprime, 0, t), Rational(0));
        EXPECT_EQ(at(dec.gamma, 0, t), Rational(t, 2));
    }
    auto rep = certify(dec);
    EXPECT_TRUE(rep.periodicity);
    EXPECT_EQ(rep.period, 2u);
}

TEST(Factorize, GoldenRotationTrivialBranch) {
    auto f = VecPolyPhase({PolyPhase::fixed({0, phase::fixed_golden()})});
    auto dec = factorize(f, desk(50, 100, 2));
    EXPECT_EQ(dec.rank(), 1u);
    EXPECT_EQ(dec.W, 10u);
    EXPECT_EQ(dec.iterations.size(), 1u);
    EXPECT_FALSE(dec.iterations[0].structured);
    EXPECT_EQ(dec.gprime[0].residues(), f[0].residues());
    EXPECT_EQ(dec.E[0].residues(), std::vector<u128>{0});
    EXPECT_TRUE(certify(dec).ok());
}

TEST(Factorize, IntegerCoefficients) {
    auto dec = factorize(scalar({Rational(5), Rational(2), Rational(3)}), desk(50, 50, 1));
    EXPECT_EQ(dec.q_base, 1u);
    for (std::int64_t t = 0; t < 10; ++t) {
        EXPECT_EQ(at(dec.gamma, 0, t), Rational(5 + 2 * t + 3 * t * t));
        EXPECT_EQ(at(dec.E, 0, t), Rational(0));
        EXPECT_EQ(at(dec.gprime, 0, t), Rational(0));
    }
    EXPECT_TRUE(certify(dec).ok());
}

TEST(Factorize, SlowRotationHasNonzeroErrorTerm) {
    auto dec = factorize(scalar({Rational(0), Rational(1, 97)}), desk(100, 200, 1));
    EXPECT_EQ(dec.rank(), 0u);
    EXPECT_EQ(at(dec.E, 0, 1), Rational(1, 97));
    auto rep = certify(dec);
    EXPECT_NEAR(rep.max_step, 1.0 / 97, 1e-12);
    auto p = desk(100, 200, 1);
    p.c_Q = 0.1;
    EXPECT_THROW(factorize(scalar({Rational(0), Rational(1, 97)}), p), InconclusiveError);
}

TEST(Factorize, ReconstructionAndPeriodicityOracles) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 6; ++trial) {
        std::size_t m = 1 + trial % 2;
        int d = 1 + trial % 3;
        auto f = random_rational(rng, m, d);
        std::uint64_t s = 1 + trial % 4;
        auto dec = factorize(f, desk(60, 60, s));
        std::uniform_int_distribution<std::int64_t> pick(-1000, 1000);
        for (int k = 0; k < 1000; ++k) {
            std::int64_t n = pick(rng), h = pick(rng);
            for (std::size_t i = 0; i < m; ++i)
                ASSERT_EQ(at(dec.E, i, n + h) + at(dec.gprime, i, n + h) + at(dec.gamma, i, n + h), f[i].eval_exact(n + h));
        }
        std::int64_t P = static_cast<std::int64_t>(dec.q * s);
        for (std::int64_t n = 0; n < 12; ++n)
            for (std::int64_t h = 0; h < 12; ++h)
                for (std::size_t i = 0; i < m; ++i) {
                    ASSERT_TRUE((at(dec.gamma, i, n + P + h) - at(dec.gamma, i, n + h)).is_integer());
                    ASSERT_TRUE((at(dec.gamma, i, n + h + P) - at(dec.gamma, i, n + h)).is_integer());
                }
        // g' lies in the span of the basis
        for (std::size_t r = 0; r < dec.rank(); ++r)
            ASSERT_EQ(dec.basis[r].size(), m);
        EXPECT_TRUE(check_decomposition(dec).ok()) << nlohmann::json(check_decomposition(dec)).dump();
        EXPECT_GE(dec.W, 10u);
        EXPECT_LE(dec.q, dec.W);
    }
}

TEST(Factorize, ParameterValidation) {
    auto f = scalar({Rational(0), Rational(1, 2)});
    auto p = desk(50, 50, 1);
    p.R = 2;
    EXPECT_THROW(factorize(f, p), ConfigError);
    EXPECT_THROW(factorize(f, desk(5, 50, 1)), ConfigError);
    EXPECT_THROW(factorize(f, desk(500, 8, 1)), ConfigError);
    nlohmann::json j = factorize(f, desk(50, 50, 1));
    EXPECT_EQ(j["q_base"], 2);
    EXPECT_EQ(j["variable"], "t = n + h");
}
