#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pressdim/boxdim.hpp"
#include "pressdim/verify.hpp"

using namespace pressdim;

namespace {

// Smallest number of closed intervals of length delta covering x (sorted,
// distinct).  An optimal cover can always be shifted so that each interval
// starts at a point, so it suffices to try every subset of left ends.
std::int64_t brute_force_cover(const std::vector<double>& x, double delta) {
    const std::size_t n = x.size();
    std::vector<std::uint32_t> reach(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] >= x[j] && x[i] <= x[j] + delta) reach[j] |= 1u << i;
    const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1u;
    std::vector<std::uint32_t> cov(std::size_t{1} << n, 0);
    int best = static_cast<int>(n);
    for (std::uint32_t m = 1; m <= all; ++m) {
        const int low = std::countr_zero(m);
        cov[m] = cov[m & (m - 1)] | reach[low];
        if (cov[m] == all) best = std::min(best, std::popcount(m));
    }
    return best;
}

std::vector<double> circle(std::size_t n) {
    std::vector<double> flat;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        flat.push_back(std::cos(a));
        flat.push_back(std::sin(a));
    }
    return flat;
}

}  // namespace

TEST(CoveringLine, TwoPointsHalfApart) {
    EXPECT_EQ(covering_count_line(PointCloud::line({0.0, 1.0}), 0.5).count, 2);
}

TEST(CoveringLine, SingletonNeedsOneInterval) {
    for (double d : {1e-9, 0.1, 3.0}) EXPECT_EQ(covering_count_line(PointCloud::line({0.37}), d).count, 1);
}

TEST(CoveringLine, ReciprocalsOfFirstHundred) {
    std::vector<double> x;
    for (int n = 1; n <= 100; ++n) x.push_back(1.0 / n);
    EXPECT_EQ(covering_count_line(PointCloud::line(x), 0.01).count, oracle::kReciprocalCover100);
}

TEST(CoveringLine, MatchesExhaustiveSearchOnSmallClouds) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> size(1, 20);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> x(size(rng));
        for (auto& v : x) v = u(rng);
        const auto cloud = PointCloud::line(x);
        const std::vector<double> sorted(cloud.data().begin(), cloud.data().end());
        for (double d : {0.01, 0.05, 0.13, 0.3, 0.7}) {
            EXPECT_EQ(covering_count_line(cloud, d).count, brute_force_cover(sorted, d))
                << "trial " << trial << " delta " << d;
        }
    }
}

TEST(CoveringLine, RejectsBadInput) {
    EXPECT_THROW(PointCloud::line({}), ValidationError);
    EXPECT_THROW(covering_count_line(PointCloud::line({0.1}), 0.0), ValidationError);
}

TEST(CoveringSphere, AntipodalPoints) {
    EXPECT_EQ(covering_count_sphere(PointCloud::sphere(2, {1.0, 0.0, -1.0, 0.0}), M_PI / 4).count, 2);
}

TEST(CoveringSphere, Singleton) {
    EXPECT_EQ(covering_count_sphere(PointCloud::sphere(3, {0.0, 0.0, 1.0}), 0.5).count, 1);
}

TEST(CoveringSphere, EquallySpacedCircle) {
    const auto cloud = PointCloud::sphere(2, circle(1000));
    ASSERT_EQ(cloud.size(), 1000u);
    const double spacing = 2.0 * M_PI / 1000.0;
    const auto c = covering_count_sphere(cloud, spacing).count;
    EXPECT_GE(c, 500);
    EXPECT_LE(c, 1000);
    // Packing numbers shrink as delta grows.
    EXPECT_LE(covering_count_sphere(cloud, 2.0 * spacing).count, c);
    // A packing at angle delta has at most 2 pi / delta members on a circle.
    for (double d : {0.01, 0.1, 0.5}) EXPECT_LE(covering_count_sphere(cloud, d).count, std::ceil(2.0 * M_PI / d));
}

TEST(CoveringSphere, EmptyOrRaggedIsRejected) {
    EXPECT_THROW(PointCloud::sphere(2, {}), ValidationError);
    EXPECT_THROW(PointCloud::sphere(3, {1.0, 0.0}), ValidationError);
}

TEST(BoxDimension, ReciprocalsAreOneHalf) {
    std::vector<double> x(1'000'000);
    for (std::size_t n = 1; n <= x.size(); ++n) x[n - 1] = 1.0 / static_cast<double>(n);
    const auto est = estimate_box_dimension(PointCloud::line(x), geometric_deltas(2.0, 6, 18));
    EXPECT_GE(est.lower_dim, 0.45);
    EXPECT_LE(est.upper_dim, 0.55);
}

TEST(BoxDimension, GeometricSequenceIsNearZero) {
    std::vector<double> x;
    for (int n = 1; n <= 60; ++n) x.push_back(std::ldexp(1.0, -n));
    // N_delta grows like log(1/delta), so local slopes decay like 1/j.
    const auto est = estimate_box_dimension(PointCloud::line(x), geometric_deltas(2.0, 20, 50, 2));
    EXPECT_LE(est.upper_dim, 0.1);
}

TEST(BoxDimension, EquallySpacedIsOne) {
    std::vector<double> x(10'000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / 9999.0;
    // Stop at delta of a few spacings; below that the counts are dominated by
    // how many grid points fit in one interval.
    const auto est = estimate_box_dimension(PointCloud::line(x), geometric_deltas(2.0, 4, 11));
    EXPECT_GE(est.lower_dim, 0.95);
    EXPECT_LE(est.upper_dim, 1.0 + 1e-12);
    const auto fine = estimate_box_dimension(PointCloud::line(x), geometric_deltas(2.0, 6, 18));
    EXPECT_TRUE(std::any_of(fine.levels.begin(), fine.levels.end(),
                            [](const DimensionLevel& l) { return l.excluded == "saturated"; }));
}

TEST(BoxDimension, AllSaturatedIsAnError) {
    const auto cloud = PointCloud::line({0.0, 0.5, 1.0});
    EXPECT_THROW(estimate_box_dimension(cloud, geometric_deltas(2.0, 6, 18)), ValidationError);
}

TEST(BoxDimension, TooFewLevelsIsAnError) {
    EXPECT_THROW(estimate_box_dimension(PointCloud::line({0.0, 1.0}), geometric_deltas(2.0, 1, 4)),
                 ValidationError);
}

TEST(BoxDimension, CircleIsOne) {
    const auto est = estimate_box_dimension(PointCloud::sphere(2, circle(100'000)), geometric_deltas(2.0, 4, 14));
    EXPECT_NEAR(est.lower_dim, 1.0, 0.05);
    EXPECT_NEAR(est.upper_dim, 1.0, 0.05);
}

TEST(GapExponents, GaussTendsToOneHalf) {
    const auto g = gap_exponent_bounds(build_partition(GeneratorSpec::gauss(), 1'000'000));
    EXPECT_NEAR(g.L_lower, 0.5, 0.01);
    EXPECT_NEAR(g.L_upper, 0.5, 0.01);
    const auto far = gap_exponent_asymptotic(build_partition(GeneratorSpec::gauss(), 1000));
    EXPECT_NEAR(far.L_lower, 0.5, 1e-5);
    EXPECT_NEAR(far.L_upper, 0.5, 1e-5);
}

TEST(GapExponents, DyadicTendsToZero) {
    const auto g = gap_exponent_bounds(build_partition(GeneratorSpec::dyadic(), 1000));
    EXPECT_LT(g.L_upper, 0.02);
    EXPECT_GE(g.L_lower, 0.0);
}

TEST(GapExponents, InterleavedOscillates) {
    const auto g = gap_exponent_bounds(build_partition(GeneratorSpec::custom("interleaved"), 1'000'000));
    EXPECT_NEAR(g.L_lower, 1.0 / 3.0, 0.02);
    EXPECT_NEAR(g.L_upper, 0.5, 0.02);
    const auto far = gap_exponent_asymptotic(build_partition(GeneratorSpec::custom("interleaved"), 1000));
    EXPECT_NEAR(far.L_lower, 1.0 / 3.0, 1e-4);
    EXPECT_NEAR(far.L_upper, 0.5, 1e-4);
}

TEST(GapExponents, TooFewIntervalsIsAnError) {
    EXPECT_THROW(gap_exponent_bounds(build_partition(GeneratorSpec::gauss(), 10)), ValidationError);
}

TEST(GapExponents, EndpointDimensionBetweenGapBounds) {
    const auto part = build_partition(GeneratorSpec::power_law(1.5), 1'000'000);
    const auto g = gap_exponent_asymptotic(part);
    const auto est = estimate_box_dimension(endpoint_cloud(part), geometric_deltas(2.0, 6, 18),
                                            endpoint_box_options(part, 0.01));
    EXPECT_GE(est.lower_dim, g.L_lower - 0.02);
    EXPECT_LE(est.upper_dim, g.L_upper + 0.02);
}
