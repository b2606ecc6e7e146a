#include <gtest/gtest.h>

#include <random>

#include "mlab/dynamics/birkhoff.hpp"
#include "mlab/dynamics/flow.hpp"

using namespace mlab;
using namespace mlab::dynamics;
using arith::FactorTable;

namespace {

const FactorTable& table() {
    static FactorTable ft(1'100'000);
    return ft;
}

const MultTable& mu() {
    static MultTable t = arith::mobius_table(table());
    return t;
}

Angle q(i128 p, i128 r) { return Angle::of(Rational(p, r)); }
PolyPhase zero_phase() { return PolyPhase(std::vector<Rational>{Rational(0)}); }

std::vector<u128> residues(const System& sys, std::vector<Rational> xs) {
    std::vector<u128> out;
    for (const auto& x : xs)
        out.push_back(sys.ring().from_rational(x));
    return out;
}

} // namespace

TEST(Orbit, QuarterRotation) {
    System sys(FlowSpec::rotation(q(1, 4)), {q(0, 1)});
    auto o = orbit(sys, 8);
    for (std::uint64_t n = 0; n < 8; ++n)
        EXPECT_EQ(sys.ring().to_rational(o[n][0]), Rational(static_cast<i128>(n % 4), 4));
}

TEST(Orbit, UnipotentFixedFiber) {
    // x -> A x fixes every point with second coordinate 0
    System sys(FlowSpec::affine({{1, 1}, {0, 1}}, {q(0, 1), q(0, 1)}), {q(3, 7), q(0, 1)});
    for (const auto& z : orbit(sys, 20))
        EXPECT_EQ(z, residues(sys, {Rational(3, 7), Rational(0)}));
    System moving(FlowSpec::affine({{1, 1}, {0, 1}}, {q(0, 1), q(0, 1)}), {q(0, 1), q(2, 7)});
    auto o = orbit(moving, 10);
    for (std::uint64_t n = 0; n < 10; ++n)
        EXPECT_EQ(o[n], residues(moving, {Rational(static_cast<i128>(2 * n), 7), Rational(2, 7)}));
}

TEST(Orbit, LinearSkewClosedForm) {
    // psi(x) = x, alpha = 0: y_n = n * x
    System sys(FlowSpec::skew(q(0, 1), PsiSpec{1, {0.0, 0.0}}), {q(5, 13), q(0, 1)});
    auto o = orbit(sys, 40);
    for (std::uint64_t n = 0; n < 40; ++n)
        EXPECT_EQ(sys.ring().to_rational(o[n][1]), (Rational(static_cast<i128>(5 * n), 13)).frac());
}

TEST(Orbit, GroupLawAndJump) {
    auto psi = PsiSpec::tabulate(2, [](double x) { return 0.1 * std::sin(2 * std::numbers::pi * x); }, 1024);
    auto spec = FlowSpec::product(FlowSpec::affine({{2, 1}, {1, 1}}, {q(1, 3), Angle::parse("golden")}), FlowSpec::skew(Angle::parse("sqrt:2"), psi));
    System sys(spec, {q(1, 5), q(0, 1), Angle::parse("sqrt:3"), q(0, 1)});
    EXPECT_TRUE(sys.ring().fixed());
    auto o = orbit(sys, 300);
    for (std::uint64_t n : {0u, 1u, 17u, 150u}) {
        EXPECT_EQ(sys.jump(sys.initial(), n), o[n]);
        OrbitCursor cur(sys, o[n], n);
        for (std::uint64_t m = 0; m < 100; ++m, cur.step())
            ASSERT_EQ(cur.state(), o[n + m]);
    }
}

TEST(Orbit, WorkerCountInvariantAverages) {
    auto psi = PsiSpec::tabulate(1, [](double x) { return 0.2 * std::abs(x - 0.5); }, 4096);
    System sys(FlowSpec::skew(Angle::parse("golden"), psi), {q(0, 1), q(0, 1)});
    auto F = Observable::character({0, 1});
    auto a = log_birkhoff_mu_average(sys, F, mu(), zero_phase(), 600'000, Exec{1});
    auto b = log_birkhoff_mu_average(sys, F, mu(), zero_phase(), 600'000, Exec{4});
    EXPECT_EQ(a, b);
}

TEST(Entropy, Verdicts) {
    auto id = zero_entropy_check({{1, 0}, {0, 1}}, true);
    EXPECT_TRUE(id.zero_entropy);
    EXPECT_TRUE(*id.exact);
    auto uni = zero_entropy_check({{1, 1}, {0, 1}}, true);
    EXPECT_TRUE(uni.zero_entropy);
    EXPECT_TRUE(*uni.exact);
    auto cat = zero_entropy_check({{2, 1}, {1, 1}}, true);
    EXPECT_FALSE(cat.zero_entropy);
    EXPECT_FALSE(*cat.exact);
    EXPECT_NEAR(cat.max_abs, (3 + std::sqrt(5.0)) / 2, 1e-12);
    EXPECT_EQ(cat.charpoly, (std::vector<i128>{1, -3, 1}));
    // order-6 rotation has all eigenvalues on the circle
    auto r6 = zero_entropy_check({{0, -1}, {1, 1}}, true);
    EXPECT_TRUE(r6.zero_entropy);
    EXPECT_TRUE(*r6.exact);
    EXPECT_THROW(zero_entropy_check({{2, 0}, {0, 1}}), ArgumentError);
}

TEST(Entropy, ExactAgreesWithSpectrumOnRandomUnimodular) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 60; ++t) {
        std::size_t n = 2 + t % 3;
        // product of elementary matrices is unimodular
        IntMatrix A(n, std::vector<std::int64_t>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            A[i][i] = 1;
        for (int k = 0; k < 3; ++k) {
            std::size_t i = rng() % n, j = rng() % n;
            if (i == j)
                continue;
            std::int64_t f = static_cast<std::int64_t>(rng() % 3) - 1;
            for (std::size_t c = 0; c < n; ++c)
                A[i][c] += f * A[j][c];
        }
        auto v = zero_entropy_check(A, true);
        EXPECT_EQ(v.zero_entropy, *v.exact);
    }
}

TEST(Birkhoff, MertensAndZeroObservable) {
    System sys(FlowSpec::rotation(q(1, 3)), {q(0, 1)});
    auto one = Observable::constant({1, 0});
    auto v = birkhoff_mu_average(sys, one, mu(), zero_phase(), 1'000'000);
    std::int64_t M = 0;
    for (std::uint64_t n = 1; n <= 1'000'000; ++n)
        M += mu().integral(n);
    EXPECT_NEAR(v.real(), static_cast<double>(M) / 1e6, 1e-15);
    EXPECT_LE(std::abs(v), 0.002);
    EXPECT_EQ(birkhoff_mu_average(sys, Observable::constant({0, 0}), mu(), zero_phase(), 10'000), std::complex<double>{});
    EXPECT_EQ(log_birkhoff_mu_average(sys, Observable::constant({0, 0}), mu(), zero_phase(), 10'000), std::complex<double>{});
}

TEST(Birkhoff, RationalRotationRegroups) {
    System sys(FlowSpec::rotation(q(1, 3)), {q(1, 5)});
    auto F = Observable::character({1});
    std::uint64_t N = 1'000'000;
    auto v = birkhoff_mu_average(sys, F, mu(), zero_phase(), N);
    std::int64_t M[3] = {0, 0, 0};
    for (std::uint64_t n = 1; n <= N; ++n)
        M[n % 3] += mu().integral(n);
    std::complex<double> regroup{};
    for (int a = 0; a < 3; ++a)
        regroup += static_cast<double>(M[a]) * std::polar(1.0, 2 * std::numbers::pi * (0.2 + a / 3.0));
    regroup /= static_cast<double>(N);
    EXPECT_NEAR(std::abs(v - regroup), 0.0, 1e-12);
}

TEST(Birkhoff, TwistedMatchesDirect) {
    System sys(FlowSpec::rotation(Angle::parse("golden")), {q(0, 1)});
    auto F = Observable::character({2});
    PolyPhase P(std::vector<Rational>{Rational(0), Rational(1, 5), Rational(1, 7)});
    std::uint64_t N = 5000;
    auto v = birkhoff_mu_average(sys, F, mu(), P, N);
    double alpha = (std::sqrt(5.0) - 1) / 2;
    std::complex<double> direct{};
    for (std::uint64_t n = 1; n <= N; ++n)
        direct += static_cast<double>(mu().integral(n)) * std::polar(1.0, 2 * std::numbers::pi * P.eval_exact(n).frac().to_double()) *
                  std::polar(1.0, 2 * std::numbers::pi * 2 * std::fmod(n * alpha, 1.0));
    EXPECT_NEAR(std::abs(v - direct / static_cast<double>(N)), 0.0, 1e-9);
}

TEST(Rigidity, PeriodicAndConstant) {
    System sys(FlowSpec::rotation(q(2, 7)), {q(1, 9)});
    auto g = observe_orbit(sys, Observable::character({1}), 2000);
    auto r = empirical_rigidity(g, 1000, {7, 14, 3});
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[1], 0.0);
    EXPECT_GT(r[2], 0.0);
    auto c = observe_orbit(sys, Observable::constant({1, 0}), 2000);
    for (double v : empirical_rigidity(c, 1000, {1, 5, 50}))
        EXPECT_EQ(v, 0.0);
    EXPECT_THROW(empirical_rigidity(g, 1000, {1000}), ArgumentError);
}

TEST(Rigidity, GoldenFibonacciShift) {
    System sys(FlowSpec::rotation(Angle::parse("golden")), {q(0, 1)});
    std::uint64_t F20 = 6765;
    auto g = observe_orbit(sys, Observable::character({1}), 100'000 + F20 + 1);
    double v = empirical_rigidity(g, 100'000, {F20})[0];
    double alpha = (std::sqrt(5.0) - 1) / 2;
    double dist = std::abs(F20 * alpha - std::round(F20 * alpha));
    EXPECT_LE(v, 4 * std::numbers::pi * std::numbers::pi * dist * dist + 1e-9);
    EXPECT_NEAR(v, 4 * std::pow(std::sin(std::numbers::pi * dist), 2), 1e-9);
}

TEST(Rigidity, RateScan) {
    System rational(FlowSpec::rotation(q(3, 10)), {q(0, 1)});
    auto F = Observable::character({1});
    auto scan = rigidity_rate_scan(rational, F, {{3, 10}, {20, 10}, {5, 30}}, 2000);
    for (const auto& row : scan.rows)
        EXPECT_EQ(row.value, 0.0);
    auto prim = rigidity_rate_scan(rational, F, {{3, 2}, {3, 6}, {3, 30}, {3, 210}}, 100);
    EXPECT_DOUBLE_EQ(prim.rows[0].s_over_phi, 2.0);
    EXPECT_DOUBLE_EQ(prim.rows[1].s_over_phi, 2.0 * 1.5);
    EXPECT_DOUBLE_EQ(prim.rows[2].s_over_phi, 2.0 * 1.5 * 1.25);
    EXPECT_DOUBLE_EQ(prim.rows[3].s_over_phi, 2.0 * 1.5 * 1.25 * 7.0 / 6.0);
    System golden(FlowSpec::rotation(Angle::parse("golden")), {q(0, 1)});
    auto fib = rigidity_rate_scan(golden, F, {{5, 21}, {5, 89}, {5, 377}, {5, 1597}}, 5000);
    for (std::size_t j = 1; j < fib.rows.size(); ++j)
        EXPECT_LT(fib.rows[j].value, fib.rows[j - 1].value);
    EXPECT_THROW(rigidity_rate_scan(golden, F, {{2, 5}}, 100), ArgumentError);
}

TEST(SkewDecomposition, Examples) {
    System lin(FlowSpec::skew(q(1, 8), PsiSpec{2, {0.0, 0.0}}), {q(0, 1), q(0, 1)});
    auto d = skew_character_decomposition(lin, {0, 1}, 5);
    EXPECT_EQ(d.discrepancy, 0.0);
    // y_5 = 2 * sum_{j<5} j/8 = 20/8
    EXPECT_EQ(lin.ring().to_rational(d.direct), Rational(1, 2));
    EXPECT_EQ(d.Q, d.direct);
    System flat(FlowSpec::skew(q(1, 8), PsiSpec{0, {0.0, 0.0}}), {q(1, 3), q(1, 5)});
    auto z = skew_character_decomposition(flat, {0, 1}, 9);
    EXPECT_EQ(z.Q, 0u);
    auto only_x = skew_character_decomposition(lin, {1, 0}, 7);
    EXPECT_EQ(only_x.direct, only_x.linear);
    EXPECT_EQ(only_x.Q, 0u);
}

TEST(SkewDecomposition, RandomTimesWithinSlack) {
    auto psi = PsiSpec::tabulate(3, [](double x) { return 0.05 * std::cos(2 * std::numbers::pi * x); });
    System sys(FlowSpec::skew(Angle::parse("golden"), psi), {Angle::parse("sqrt:7"), q(1, 4)});
    std::mt19937_64 rng(9);
    for (int t = 0; t < 1000; ++t) {
        std::int64_t b1 = static_cast<std::int64_t>(rng() % 7) - 3, b2 = static_cast<std::int64_t>(rng() % 7) - 3;
        std::uint64_t n = rng() % 300;
        auto d = skew_character_decomposition(sys, {b1, b2}, n);
        ASSERT_LE(d.discrepancy, d.slack);
    }
}

TEST(FlowSpecJson, RoundTripAndProductObservable) {
    nlohmann::json j = nlohmann::json::parse(R"({
        "type": "product",
        "left": {"type": "affine", "A": [[1, 1], [0, 1]], "b": ["1/3", "golden"]},
        "right": {"type": "skew", "alpha": "sqrt:2", "psi": {"c": 1, "nodes": [0, 0.1, 0]}},
        "observable": {"kind": "product", "split": 2,
                       "left": {"kind": "character", "b": [1, 0]},
                       "right": {"kind": "table", "b": [0, 1], "table": [0, 1, 0]}}})");
    auto spec = flow_from_json(j);
    EXPECT_EQ(spec.dim(), 4u);
    EXPECT_EQ(flow_to_json(flow_from_json(flow_to_json(spec))), flow_to_json(spec));
    System sys(spec, {q(0, 1), q(1, 2), q(1, 3), q(0, 1)});
    const auto& F = *spec.observable;
    for (const auto& z : orbit(sys, 50))
        EXPECT_EQ(sys.observe(F, z), sys.observe(*F.left, z) * evaluate(*F.right, sys.ring(), z.data() + 2));
    EXPECT_THROW(flow_from_json(nlohmann::json::parse(R"({"type": "affine", "A": [[1.5]]})")), ArgumentError);
    EXPECT_THROW(flow_from_json(nlohmann::json::parse(R"({"type": "warp"})")), ConfigError);
    EXPECT_THROW(System(FlowSpec::skew(q(1, 2), PsiSpec{0, {0.0, 1.0}}), {q(0, 1), q(0, 1)}), ConfigError);
}

TEST(Birkhoff, FastMatchesBruteBitExact) {
    std::mt19937_64 rng(21);
    auto psi = PsiSpec::tabulate(1, [](double x) { return 0.1 * x * (1 - x); }, 512);
    std::vector<System> systems;
    systems.emplace_back(FlowSpec::rotation(Angle::parse("golden")), std::vector<Angle>{q(1, 7)});
    systems.emplace_back(FlowSpec::affine({{1, 1}, {0, 1}}, {q(1, 5), Angle::parse("sqrt:2")}), std::vector<Angle>{q(0, 1), q(1, 3)});
    systems.emplace_back(FlowSpec::skew(Angle::parse("sqrt:3"), psi), std::vector<Angle>{q(0, 1), q(0, 1)});
    for (int t = 0; t < 6; ++t) {
        const auto& sys = systems[t % 3];
        auto F = Observable::character(std::vector<std::int64_t>(sys.dim(), 1 + t % 2));
        PolyPhase P(std::vector<Rational>{Rational(0), Rational(t, 11), Rational(1, 3 + t)});
        std::uint64_t N = 3000 + 700 * t;
        auto a = birkhoff_mu_average(sys, F, mu(), P, N, Exec{1}, Algo::fast);
        auto b = birkhoff_mu_average(sys, F, mu(), P, N, Exec{1}, Algo::brute);
        ASSERT_EQ(a, b);
        ASSERT_EQ(log_birkhoff_mu_average(sys, F, mu(), P, N, Exec{1}, Algo::fast), log_birkhoff_mu_average(sys, F, mu(), P, N, Exec{1}, Algo::brute));
    }
}
