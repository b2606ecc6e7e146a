#include <gtest/gtest.h>

#include <random>

#include "mlab/phase/diff_table.hpp"
#include "mlab/phase/phasor.hpp"
#include "mlab/phase/poly_phase.hpp"

using namespace mlab;
using namespace mlab::phase;

namespace {

Rational rand_rational(std::mt19937_64& rng, int max_den) {
    std::uniform_int_distribution<int> num(-50, 50), den(1, max_den);
    return Rational(num(rng), den(rng));
}

PolyPhase rand_poly(std::mt19937_64& rng, int d, int max_den) {
    std::vector<Rational> c;
    for (int i = 0; i <= d; ++i)
        c.push_back(rand_rational(rng, max_den));
    return PolyPhase(c);
}

// Direct mod-1 evaluation through exact rationals.
Rational frac_oracle(const std::vector<Rational>& c, std::int64_t n) {
    Rational r(0);
    Rational pw(1);
    for (const auto& a : c) {
        r += a * pw;
        pw *= Rational(n);
    }
    return r.frac();
}

Rational binom_rational(std::int64_t n, int i) {
    Rational r(1);
    for (int k = 0; k < i; ++k)
        r = r * Rational(n - k) / Rational(k + 1);
    return r;
}

} // namespace

TEST(PolyPhase, EvalSmallCases) {
    PolyPhase p({Rational(0), Rational(1, 3)});
    EXPECT_EQ(p.ring().to_rational(p.eval_residue(7)), Rational(1, 3));
    PolyPhase sq({Rational(0), Rational(0), Rational(1)});
    for (std::int64_t n = -20; n <= 20; ++n)
        EXPECT_EQ(sq.eval_residue(n), 0u);
    EXPECT_EQ(sq.degree(), 2);
    PolyPhase trailing({Rational(1, 2), Rational(0), Rational(0)});
    EXPECT_EQ(trailing.degree(), 0);
}

TEST(PolyPhase, QuarterSquareStreamMatchesRationalOracle) {
    std::vector<Rational> c{Rational(0), Rational(0), Rational(1, 4)};
    PolyPhase p(c);
    DiffTable dt(p, 1);
    for (std::int64_t n = 1; n <= 100; ++n) {
        ASSERT_EQ(p.ring().to_rational(dt.value()), frac_oracle(c, n)) << n;
        dt.step();
    }
}

TEST(PolyPhase, PrecisionErrorOnHugeDenominator) {
    std::vector<Rational> c{Rational(1, (i128{1} << 40) + 1), Rational(1, (i128{1} << 40) - 1)};
    EXPECT_THROW(PolyPhase{c}, PrecisionError);
}

TEST(DiffTable, ConstantPolynomial) {
    PolyPhase c({Rational(7, 5)});
    DiffTable dt(c, 0);
    for (int i = 0; i < 50; ++i)
        EXPECT_EQ(c.ring().to_rational(dt.step()), Rational(2, 5));
}

TEST(DiffTable, FixedLinearMillionSteps) {
    auto p = PolyPhase::fixed({0, fixed_golden()});
    DiffTable dt(p, 0);
    for (std::int64_t n = 1; n <= 1'000'000; ++n)
        ASSERT_EQ(dt.step(), p.eval_residue(n)) << n;
}

TEST(DiffTable, BitExactAllDegreesBothModes) {
    std::mt19937_64 rng(11);
    for (int d = 0; d <= 6; ++d) {
        auto rp = rand_poly(rng, d, 97);
        std::vector<u128> fx;
        for (int i = 0; i <= d; ++i)
            fx.push_back((static_cast<u128>(rng()) << 64 | rng()) & (kFixedModulus - 1));
        auto fp = PolyPhase::fixed(fx);
        for (const PolyPhase* p : {&rp, &fp}) {
            std::int64_t n0 = -12345;
            DiffTable dt(*p, n0);
            for (std::int64_t n = n0 + 1; n <= n0 + 1'000'000; ++n)
                ASSERT_EQ(dt.step(), p->eval_residue(n)) << "d=" << d << " n=" << n;
        }
    }
}

TEST(PolyPhase, BinomialBasis) {
    PolyPhase sq({Rational(0), Rational(0), Rational(1)});
    auto b = sq.binomial_coeffs();
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0], Rational(0));
    EXPECT_EQ(b[1], Rational(1));
    EXPECT_EQ(b[2], Rational(2));
    PolyPhase c({Rational(3, 7)});
    EXPECT_EQ(c.binomial_coeffs(), std::vector<Rational>{Rational(3, 7)});
}

TEST(PolyPhase, BinomialRoundTripAndEvaluation) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = rand_poly(rng, 4, 30);
        auto b = p.binomial_coeffs();
        auto back = PolyPhase::from_binomial(b);
        EXPECT_EQ(back.coeffs(), p.coeffs());
        for (std::int64_t n = 0; n <= 20; ++n) {
            Rational via_binom(0);
            for (std::size_t i = 0; i < b.size(); ++i)
                via_binom += b[i] * binom_rational(n, static_cast<int>(i));
            ASSERT_EQ(via_binom, p.eval_exact(n));
        }
        // residue form agrees with the exact form
        auto br = p.binomial_residues();
        for (std::size_t i = 0; i < b.size(); ++i)
            EXPECT_EQ(br[i], p.ring().from_rational(b[i]));
    }
}

TEST(PolyPhase, ModeConsistencyBound) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        int d = trial % 5 + 1;
        auto p = rand_poly(rng, d, 1000);
        auto q = PolyPhase::quantized(p.coeffs());
        for (std::int64_t n : {0, 1, 2, 17, 1000, 123456}) {
            Rational exact = p.ring().to_rational(p.eval_residue(n));
            long double fx = static_cast<long double>(q.eval_residue(n)) / static_cast<long double>(kFixedModulus);
            long double diff = std::fabs(exact.to_long_double() - fx);
            diff = std::min(diff, 1.0L - diff);
            // round-to-nearest on each monomial coefficient: sum_i 2^-128 |n|^i,
            // plus the long double rounding of the two sides being compared
            long double bound = 2e-19L;
            for (int i = 0; i <= d; ++i)
                bound += std::ldexp(1.0L, -128) * std::pow(static_cast<long double>(n), i);
            EXPECT_LE(diff, bound) << "n=" << n;
        }
    }
}

TEST(PolyPhase, ShiftIdentity) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        auto p = rand_poly(rng, trial % 6 + 1, 60);
        auto dp = p.forward_difference();
        EXPECT_EQ(dp.degree(), p.degree() - 1 < 0 ? 0 : dp.degree());
        for (std::int64_t n = -10; n <= 10; ++n)
            ASSERT_EQ((p.eval_exact(n + 1) - p.eval_exact(n)), dp.eval_exact(n));
        auto fx = PolyPhase::quantized(p.coeffs());
        auto dfx = fx.forward_difference();
        for (std::int64_t n = -10; n <= 10; ++n)
            ASSERT_EQ(fx.ring().sub(fx.eval_residue(n + 1), fx.eval_residue(n)), dfx.eval_residue(n));
    }
}

TEST(PolyPhase, ComposeAffine) {
    std::mt19937_64 rng(17);
    auto p = rand_poly(rng, 3, 20);
    auto q = p.compose_affine(5, 3);
    for (std::int64_t n = -5; n <= 5; ++n)
        EXPECT_EQ(q.eval_exact(n), p.eval_exact(5 + 3 * n));
    auto fx = PolyPhase::quantized(p.coeffs());
    auto fq = fx.compose_affine(5, 3);
    for (std::int64_t n = -5; n <= 5; ++n)
        EXPECT_EQ(fq.eval_residue(n), fx.eval_residue(5 + 3 * n));
}

TEST(PolyPhase, LiteralRoundTrip) {
    auto p = parse_phase("2:0,1/3,-5/4");
    EXPECT_EQ(p.degree(), 2);
    EXPECT_EQ(p.coeffs()[2], Rational(-5, 4));
    EXPECT_EQ(parse_phase(p.literal()), p);
    auto f = PolyPhase::fixed({0, fixed_golden(), fixed_sqrt_frac(2)});
    EXPECT_EQ(parse_phase(f.literal()), f);
    EXPECT_THROW(parse_phase("3:1,2"), ArgumentError);
    EXPECT_THROW(parse_phase("fx:zz"), ArgumentError);
    EXPECT_THROW(parse_phase("1,2"), ArgumentError);
    auto v = parse_vec_phase("1:0,1/2;1:0,1/3");
    EXPECT_EQ(v.dim(), 2u);
    EXPECT_EQ(v.ring().modulus(), 6u);
}

TEST(PolyPhase, QuadraticIrrationalConstants) {
    double g = Mod1Ring(kFixedModulus).to_double(fixed_golden());
    EXPECT_NEAR(g, (std::sqrt(5.0) - 1) / 2, 1e-15);
    double r2 = Mod1Ring(kFixedModulus).to_double(fixed_sqrt_frac(2));
    EXPECT_NEAR(r2, std::sqrt(2.0) - 1, 1e-15);
}

TEST(Phasor, LatticeValues) {
    auto one = phasor_of_unit(0.0);
    EXPECT_EQ(one.re, 1ll << 30);
    EXPECT_EQ(one.im, 0);
    auto half = phasor_of_unit(0.5);
    EXPECT_EQ(half.re, -(1ll << 30));
    Mod1Ring ring(7);
    PhasorCache cache(ring);
    for (u128 r = 0; r < 7; ++r)
        EXPECT_EQ(cache(r), phasor_of(ring, r));
}
