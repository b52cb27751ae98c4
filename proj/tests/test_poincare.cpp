#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pressdim/poincare.hpp"

using namespace pressdim;

namespace {

Vec v1(double a) { return (Vec(1) << a).finished(); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

ParabolicGroupSpec unit_k1() { return ParabolicGroupSpec::make(2, {v1(1.0)}); }
ParabolicGroupSpec orthogonal_k2() { return ParabolicGroupSpec::make(3, {v2(1, 0), v2(0, 1)}); }

}  // namespace

TEST(PoincareSeries, ZeroExponentCountsElements) {
    EXPECT_DOUBLE_EQ(poincare_partial(unit_k1(), 0.0, 2).partial_sum, 5.0);
    EXPECT_DOUBLE_EQ(poincare_partial(orthogonal_k2(), 0.0, 2).partial_sum, 25.0);
}

TEST(PoincareSeries, KOneAtSOneMatchesClosedForm) {
    const std::int64_t M = 1'000'000;
    const auto s = poincare_partial(unit_k1(), 1.0, M);
    EXPECT_EQ(s.tail_class, TailClass::ConvergentWithBound);
    EXPECT_LE(s.partial_sum, oracle::kPoincareK1S1);
    EXPECT_GE(s.partial_sum + s.tail_bound, oracle::kPoincareK1S1);
    // Terms behave like N^-2 on both sides, so the tail is about 2/M.
    EXPECT_NEAR(s.partial_sum + 2.0 / M, oracle::kPoincareK1S1, 1e-6);
}

TEST(PoincareSeries, BelowHalfIsDivergent) {
    const auto a = poincare_partial(unit_k1(), 0.4, 1000);
    const auto b = poincare_partial(unit_k1(), 0.4, 100'000);
    EXPECT_EQ(a.tail_class, TailClass::DivergentMinorant);
    EXPECT_TRUE(std::isinf(a.tail_bound));
    EXPECT_LE(b.minorant, b.partial_sum);
    // Minorant grows like M^{0.2}.
    EXPECT_GT(b.minorant / a.minorant, 0.5 * std::pow(100.0, 0.2));
}

TEST(PoincareSeries, BandAroundHalfIsUndetermined) {
    EXPECT_EQ(classify_poincare_tail(1, 0.5, 1e-9), TailClass::Undetermined);
    EXPECT_EQ(classify_poincare_tail(2, 1.1, 1e-9), TailClass::ConvergentWithBound);
    EXPECT_EQ(classify_poincare_tail(2, 0.9, 1e-9), TailClass::DivergentMinorant);
}

TEST(PoincareSeries, OversizedCubeIsRejected) {
    EXPECT_THROW(poincare_partial(orthogonal_k2(), 1.0, 100'000), CapacityError);
}

class CriticalExponent : public ::testing::TestWithParam<int> {};

TEST_P(CriticalExponent, BracketContainsHalfTheRank) {
    const int which = GetParam();
    ParabolicGroupSpec g = unit_k1();
    if (which == 1) g = ParabolicGroupSpec::make(4, {(Vec(3) << 0.3, 2.0, -1.0).finished()});
    if (which == 2) g = orthogonal_k2();
    if (which == 3) g = ParabolicGroupSpec::make(3, {v2(1, 0), v2(1, 1)});
    const double tol = 0.01;
    const auto e = critical_exponent(g, tol);
    const double target = 0.5 * g.k;
    EXPECT_LE(e.width(), tol);
    EXPECT_LE(e.s_low, target);
    EXPECT_GE(e.s_high, target);
    EXPECT_EQ(e.behavior, DivergenceBehavior::DivergesAtSInf);
    EXPECT_FALSE(e.evidence.empty());
}

INSTANTIATE_TEST_SUITE_P(Groups, CriticalExponent, ::testing::Values(0, 1, 2, 3));

TEST(CriticalExponent, SkewBasisMatchesOrthogonal) {
    const auto a = critical_exponent(orthogonal_k2(), 0.01);
    const auto b = critical_exponent(ParabolicGroupSpec::make(3, {v2(1, 0), v2(1, 1)}), 0.01);
    EXPECT_EQ(a.s_low, b.s_low);
    EXPECT_EQ(a.s_high, b.s_high);
}

TEST(Counting, KOneClosedFormCount) {
    const auto cf = counting_exponent(unit_k1(), 20.0, 4);
    EXPECT_DOUBLE_EQ(cf.thresholds.back(), 20.0);
    EXPECT_EQ(cf.counts.back(), oracle::kLatticeCountK1T20);
    EXPECT_EQ(cf.counts.back(), 2 * static_cast<long long>(std::floor(2.0 * std::sinh(10.0))) + 1);
}

TEST(Counting, KTwoOrthogonalMatchesEnumeration) {
    const auto cf = counting_exponent(orthogonal_k2(), 20.0, 4);
    EXPECT_EQ(cf.counts.back(), oracle::kLatticeCountK2T20);
    const double R = 2.0 * std::sinh(10.0);
    EXPECT_NEAR(static_cast<double>(cf.counts.back()) / (M_PI * R * R), 1.0, 1e-6);
}

TEST(Counting, FinalSlopesAreHalfTheRank) {
    const auto c1 = counting_exponent(unit_k1(), 20.0, 40);
    EXPECT_NEAR(c1.final_slope, 0.5, 0.02);
    const auto c2 = counting_exponent(orthogonal_k2(), 20.0, 40);
    EXPECT_NEAR(c2.final_slope, 1.0, 0.05);
}

TEST(Counting, SmallThresholdsAreDegenerate) {
    const auto cf = counting_exponent(ParabolicGroupSpec::make(2, {v1(5.0)}), 20.0, 40);
    EXPECT_EQ(cf.counts.front(), 1);
    EXPECT_EQ(cf.slopes.front(), 0.0);
    EXPECT_GE(cf.thresholds[cf.fit_from], 2.0 * std::asinh(2.5));
}

TEST(Counting, CountsAreMonotone) {
    const auto cf = counting_exponent(ParabolicGroupSpec::make(3, {v2(1, 0), v2(0.4, 1.3)}), 20.0, 50);
    for (std::size_t j = 1; j < cf.counts.size(); ++j) {
        EXPECT_GE(cf.counts[j], cf.counts[j - 1]);
        if (cf.thresholds[j] >= 6.0) {
            EXPECT_GT(cf.counts[j], cf.counts[j - 1]) << "t=" << cf.thresholds[j];
        }
    }
}

TEST(Counting, UnimodularChangeOfBasisKeepsSlope) {
    const auto a = counting_exponent(ParabolicGroupSpec::make(3, {v2(1, 0), v2(0.3, 1.0)}), 20.0, 30);
    // alpha'_2 = alpha_1 + alpha_2 spans the same lattice.
    const auto b = counting_exponent(ParabolicGroupSpec::make(3, {v2(1, 0), v2(1.3, 1.0)}), 20.0, 30);
    EXPECT_NEAR(a.final_slope, b.final_slope, 0.02);
    for (std::size_t j = 0; j < a.counts.size(); ++j)
        EXPECT_NEAR(static_cast<double>(a.counts[j]), static_cast<double>(b.counts[j]), 1e-9 * a.counts[j] + 2.0);
}

TEST(Counting, CapacityReportsAchievableThreshold) {
    try {
        counting_exponent(orthogonal_k2(), 80.0, 10);
        FAIL() << "expected a capacity error";
    } catch (const CapacityError& e) {
        EXPECT_NE(std::string(e.what()).find("achievable t_max"), std::string::npos) << e.what();
    }
}

TEST(GaugeGap, DistanceMinusLogSquareIsBounded) {
    double lo = 1e300, hi = -1e300;
    for (std::int64_t N = 1; N <= 10'000; ++N) {
        const double x = static_cast<double>(N);
        const double gap = horosphere_distance(x) - 2.0 * std::log(x);
        lo = std::min(lo, gap);
        hi = std::max(hi, gap);
    }
    EXPECT_LE(hi - lo, 1.0);
    // 2 asinh(x/2) - 2 log x decreases to 0.
    double prev = horosphere_distance(100.0) - 2.0 * std::log(100.0);
    for (double x : {1e3, 1e4, 1e5}) {
        const double g = horosphere_distance(x) - 2.0 * std::log(x);
        EXPECT_LT(std::abs(g), std::abs(prev));
        prev = g;
    }
}

TEST(Dichotomy, InverseSquareConverges) {
    const auto r = verify_dichotomy(DichotomyRule::power(2.0));
    EXPECT_NEAR(r.ratio_limsup, 0.5, 1e-12);
    EXPECT_EQ(r.test, DichotomyVerdict::Converges);
    EXPECT_TRUE(r.observed_converging);
    EXPECT_TRUE(r.consistent);
}

TEST(Dichotomy, HarmonicIsBoundary) {
    const auto r = verify_dichotomy(DichotomyRule::power(1.0));
    EXPECT_EQ(r.test, DichotomyVerdict::Boundary);
    EXPECT_FALSE(r.observed_converging);
    EXPECT_TRUE(r.consistent);
}

TEST(Dichotomy, OrbitSeriesAboveCriticalConverges) {
    const auto r = verify_dichotomy(DichotomyRule::orbit(0.6));
    EXPECT_NEAR(r.ratio_limsup, 1.0 / 1.2, 0.01);
    EXPECT_EQ(r.test, DichotomyVerdict::Converges);
    EXPECT_TRUE(r.consistent);
}

TEST(Dichotomy, OrbitSeriesBelowCriticalDiverges) {
    const auto r = verify_dichotomy(DichotomyRule::orbit(0.4));
    EXPECT_EQ(r.test, DichotomyVerdict::Diverges);
    EXPECT_FALSE(r.observed_converging);
    EXPECT_TRUE(r.consistent);
}

TEST(Dichotomy, IncreasingRuleIsRejected) {
    const DichotomyRule up{"n", [](double n) { return -std::log(n); }};
    EXPECT_THROW(verify_dichotomy(up), ValidationError);
}
