#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pressdim/interval_partition.hpp"

using namespace pressdim;

TEST(IntervalPartition, GaussFirstThreeBranches) {
    const auto p = build_partition(GeneratorSpec::gauss(), 3);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_DOUBLE_EQ(p.left()[0], 0.5);
    EXPECT_DOUBLE_EQ(p.right()[0], 1.0);
    EXPECT_DOUBLE_EQ(p.left()[1], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(p.right()[1], 0.5);
    EXPECT_DOUBLE_EQ(p.left()[2], 0.25);
    EXPECT_DOUBLE_EQ(p.right()[2], 1.0 / 3.0);
    EXPECT_EQ(p.tail_kind(), TailKind::Rule);
}

TEST(IntervalPartition, GaussLengthsAreExactReciprocals) {
    const auto p = build_partition(GeneratorSpec::gauss(), 1'000'000);
    for (std::int64_t n : {1LL, 2LL, 17LL, 1000LL, 123456LL, 1000000LL}) {
        const double x = static_cast<double>(n);
        EXPECT_EQ(p.length(n), 1.0 / (x * (x + 1.0))) << "n=" << n;
    }
    // Past the prefix the tail rule takes over with the same formula.
    EXPECT_DOUBLE_EQ(p.length(2'000'000), 1.0 / (2e6 * (2e6 + 1.0)));
}

TEST(IntervalPartition, DyadicLengths) {
    const auto p = build_partition(GeneratorSpec::dyadic(), 3);
    EXPECT_EQ(p.lengths(), (std::vector<double>{0.5, 0.25, 0.125}));
    EXPECT_TRUE(p.tiles_unit_interval());
}

TEST(IntervalPartition, OverlappingExplicitListIsRejected) {
    const auto spec = GeneratorSpec::explicit_list({{0.1, 0.3}, {0.2, 0.5}});
    try {
        build_partition(spec, 10);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("overlap"), std::string::npos) << e.what();
    }
}

TEST(IntervalPartition, ExplicitListIsSortedByRightEndpoint) {
    const auto p = build_partition(GeneratorSpec::explicit_list({{0.0, 0.25}, {0.5, 1.0}, {0.25, 0.5}}), 10);
    EXPECT_EQ(p.right(), (std::vector<double>{1.0, 0.5, 0.25}));
    EXPECT_TRUE(p.tiles_unit_interval());
    EXPECT_EQ(p.tail_kind(), TailKind::None);
}

TEST(IntervalPartition, PowerLawTilesUnitInterval) {
    const auto p = build_partition(GeneratorSpec::power_law(1.5), 5000);
    EXPECT_DOUBLE_EQ(p.right()[0], 1.0);
    for (std::size_t i = 1; i < p.size(); ++i) EXPECT_EQ(p.right()[i], p.left()[i - 1]);
    const auto tail = p.tail_power_sum(1.0);
    EXPECT_GE(p.left().back(), tail.lo - 1e-15);
    EXPECT_LE(p.left().back(), tail.hi + 1e-15);
}

TEST(IntervalPartition, NLog2Normalization) {
    const auto p = build_partition(GeneratorSpec::custom("n-log2"), 100);
    // Interval 1 carries c / (2 log^2 2) with c the reciprocal of the full sum.
    const double expected = 1.0 / (oracle::kNLog2Total * 2.0 * std::log(2.0) * std::log(2.0));
    EXPECT_NEAR(p.length(1), expected, 1e-14);
}

TEST(IntervalPartition, SortingByLengthIsAPermutation) {
    const auto p = build_partition(GeneratorSpec::custom("interleaved"), 1000);
    auto a = p.lengths();
    auto b = p.sorted_lengths();
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end(), std::greater<>()));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
}

TEST(IntervalPartition, EndpointsShareCommonPoints) {
    const auto p = build_partition(GeneratorSpec::gauss(), 10);
    const auto e = p.endpoints();
    EXPECT_EQ(e.size(), 11u);
    EXPECT_DOUBLE_EQ(e.front(), 1.0 / 11.0);
    EXPECT_DOUBLE_EQ(e.back(), 1.0);
}

TEST(IntervalPartition, NonExpandingBranchIsRejected) {
    const auto p = build_partition(GeneratorSpec::explicit_list({{0.0, 1.0}}), 1);
    EXPECT_THROW(BranchMap(p, BranchKind::LinearFull), ValidationError);
}

TEST(Refine, DyadicTwoBranchesSquared) {
    const BranchMap map(build_partition(GeneratorSpec::dyadic(), 2), BranchKind::LinearFull);
    const auto r = refine_partition(map, 2);
    ASSERT_EQ(r.size(), 4u);
    auto len = r.lengths();
    std::sort(len.begin(), len.end(), std::greater<>());
    EXPECT_EQ(len, (std::vector<double>{0.25, 0.125, 0.125, 0.0625}));
}

TEST(Refine, OrderOneIsIdentity) {
    const BranchMap map(build_partition(GeneratorSpec::gauss(), 20), BranchKind::GaussAnalytic);
    const auto r = refine_partition(map, 1);
    EXPECT_EQ(r.left(), map.partition().left());
    EXPECT_EQ(r.right(), map.partition().right());
}

TEST(Refine, LinearCylinderLengthsAreExactProducts) {
    const BranchMap map(build_partition(GeneratorSpec::dyadic(), 5), BranchKind::LinearFull);
    const auto r = refine_partition(map, 3);
    ASSERT_EQ(r.size(), 125u);
    for (std::size_t i = 0; i < r.size(); ++i) {
        // Every length is a power of two equal to 2^-(n1+n2+n3), so the
        // product is exact and b - a reproduces it.
        EXPECT_EQ(r.lengths()[i], r.right()[i] - r.left()[i]);
        int e = 0;
        EXPECT_EQ(std::frexp(r.lengths()[i], &e), 0.5);
    }
}

TEST(Refine, GaussTwoDigitsMatchesInverseBranches) {
    const BranchMap map(build_partition(GeneratorSpec::gauss_restricted({1, 2}), 2), BranchKind::GaussAnalytic);
    const auto r = refine_partition(map, 3);
    ASSERT_EQ(r.size(), 8u);
    // Images of [0,1] under phi_{d1} o phi_{d2} o phi_{d3}, phi_d(x) = 1/(d+x).
    std::vector<std::pair<double, double>> direct;
    for (int d1 : {1, 2})
        for (int d2 : {1, 2})
            for (int d3 : {1, 2}) {
                auto phi = [&](double x) { return 1.0 / (d1 + 1.0 / (d2 + 1.0 / (d3 + x))); };
                const double u = phi(0.0), v = phi(1.0);
                direct.emplace_back(std::min(u, v), std::max(u, v));
            }
    std::sort(direct.begin(), direct.end(), [](auto& x, auto& y) { return x.second > y.second; });
    double covered = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(r.left()[i], direct[i].first, 1e-15);
        EXPECT_NEAR(r.right()[i], direct[i].second, 1e-15);
        EXPECT_NEAR(r.lengths()[i], direct[i].second - direct[i].first, 1e-15);
        covered += r.lengths()[i];
    }
    // Rank-1 intervals cover [1/3, 1]; the rank-3 cylinders leave gaps.
    EXPECT_LT(covered, 2.0 / 3.0);
    EXPECT_GT(covered, 0.1);
}

TEST(Refine, CapOverflowReportsRequiredCap) {
    const BranchMap map(build_partition(GeneratorSpec::dyadic(), 64), BranchKind::LinearFull);
    try {
        refine_partition(map, 5, 1000);
        FAIL() << "expected a capacity error";
    } catch (const CapacityError& e) {
        EXPECT_NE(std::string(e.what()).find("1073741824"), std::string::npos) << e.what();
    }
}

TEST(Perturb, SplitFirstGaussInterval) {
    const auto g = build_partition(GeneratorSpec::gauss(), 100);
    const auto p = perturb_compactly(g, 0.5, {{0.5, 0.75}, {0.75, 1.0}});
    ASSERT_GE(p.size(), 4u);
    EXPECT_DOUBLE_EQ(p.lengths()[0], 0.25);
    EXPECT_DOUBLE_EQ(p.lengths()[1], 0.25);
    EXPECT_DOUBLE_EQ(p.lengths()[2], 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(p.lengths()[3], 1.0 / 12.0);
    EXPECT_EQ(p.size(), g.size() + 1);
    // Below c the partition is unchanged, including the tail indices.
    EXPECT_DOUBLE_EQ(p.length(1001), g.length(1000));
}

TEST(Perturb, IdentityReplacement) {
    const auto g = build_partition(GeneratorSpec::gauss(), 50);
    const auto p = perturb_compactly(g, 1.0 / 3.0, {{1.0 / 3.0, 0.5}, {0.5, 1.0}});
    EXPECT_EQ(p.left(), g.left());
    EXPECT_EQ(p.right(), g.right());
    EXPECT_EQ(p.lengths(), g.lengths());
}

TEST(Perturb, LeakingReplacementIsRejected) {
    const auto g = build_partition(GeneratorSpec::gauss(), 50);
    EXPECT_THROW(perturb_compactly(g, 0.5, {{0.4, 1.0}}), ValidationError);
}

TEST(Perturb, MassChangeIsRejected) {
    const auto g = build_partition(GeneratorSpec::gauss(), 50);
    EXPECT_THROW(perturb_compactly(g, 0.5, {{0.5, 0.7}, {0.8, 1.0}}), ValidationError);
}
