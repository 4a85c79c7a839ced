#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace wmc;
using wmc::testing::masks_of;
using wmc::testing::minimal_masks;
using wmc::testing::replay_ok;

namespace {

std::vector<ChargePattern> parse(std::initializer_list<const char*> bits) {
    std::vector<ChargePattern> out;
    for (const char* b : bits) out.push_back(ChargePattern::from_string(b));
    return out;
}

std::vector<double> random_lengths(Rng& rng, int m) {
    std::vector<double> c;
    for (int e = 0; e < m; ++e) c.push_back(static_cast<double>(rng.uniform_int(1, 100)));
    return c;
}

} // namespace

TEST(Pattern, StringIsEdgeOneFirst) {
    const auto p = ChargePattern::from_string("100");
    EXPECT_TRUE(p.test(0));
    EXPECT_FALSE(p.test(2));
    EXPECT_EQ(p.bits(), 1U);
    EXPECT_EQ(p.to_string(), "100");
    EXPECT_TRUE(ChargePattern::from_string("00101").is_subset_of(ChargePattern::from_string("10101")));
}

TEST(Preprocess, SingleEdgeWithinCapacityIsTrivial) {
    const std::vector<double> c = {8};
    EXPECT_EQ(preprocess_route(c, {10, 1, 2}), RouteClass::TriviallyFeasibleNoCharge);
}

TEST(Preprocess, SingleEdgeBeyondCapacityIsInfeasible) {
    const std::vector<double> c = {12};
    EXPECT_EQ(preprocess_route(c, {10, 1, 1.5}), RouteClass::Infeasible);
}

TEST(Preprocess, OverCapacityNeedsSearch) {
    const std::vector<double> c = {4, 4, 4};
    EXPECT_EQ(preprocess_route(c, {10, 1, 2}), RouteClass::NeedsBdp);
}

TEST(Preprocess, UncrossableEdgeIsInfeasible) {
    // with gamma < rho_t charging still loses (1 - 0.5) * 30 = 15 > 10
    const std::vector<double> c = {2, 30, 2};
    EXPECT_EQ(preprocess_route(c, {10, 1, 0.5}), RouteClass::Infeasible);
}

TEST(Suffix, Examples) {
    const std::vector<double> a = {4, 4, 4}, b = {7}, c = {1, 2, 3, 4};
    EXPECT_EQ(suffix_requirements(a, {10, 1, 2}), (std::vector<double>{8, 4, 0}));
    EXPECT_EQ(suffix_requirements(b, {10, 1, 2}), (std::vector<double>{0}));
    EXPECT_EQ(suffix_requirements(c, {10, 1, 2}), (std::vector<double>{9, 7, 4, 0}));
}

TEST(Enumerate, ThreeEqualEdges) {
    const std::vector<double> c = {4, 4, 4};
    const auto res = enumerate_patterns(c, {10, 1, 2});
    EXPECT_EQ(res.classification, BdpClass::Enumerated);
    EXPECT_EQ(masks_of(res), minimal_masks(c, 10, 1, 2));
    EXPECT_EQ(format_patterns(res), "100 2\n010 6\n001 6\n");
}

TEST(Enumerate, WithinCapacityIsNoChargeOnly) {
    const std::vector<double> c = {2, 3, 4};
    const auto res = enumerate_patterns(c, {10, 1, 2});
    EXPECT_EQ(res.classification, BdpClass::TriviallyFeasibleNoCharge);
    ASSERT_EQ(res.patterns.size(), 1U);
    EXPECT_TRUE(res.patterns[0].pattern.none());
    EXPECT_DOUBLE_EQ(res.patterns[0].final_battery, 1.0);
}

TEST(Enumerate, AllEdgesTooLongIsEmpty) {
    const std::vector<double> c = {30, 30};
    const auto res = enumerate_patterns(c, {10, 1, 0.5});
    EXPECT_EQ(res.classification, BdpClass::Infeasible);
    EXPECT_TRUE(res.patterns.empty());
}

TEST(Enumerate, ResultIsAntichainInBitmaskOrder) {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = static_cast<int>(rng.uniform_int(2, 10));
        const auto c = random_lengths(rng, m);
        const auto res = enumerate_patterns(c, {static_cast<double>(rng.uniform_int(50, 300)), 1, 2});
        for (std::size_t i = 0; i < res.patterns.size(); ++i) {
            if (i > 0) EXPECT_LT(res.patterns[i - 1].pattern.bits(), res.patterns[i].pattern.bits());
            for (std::size_t j = 0; j < res.patterns.size(); ++j)
                if (i != j) EXPECT_FALSE(res.patterns[i].pattern.is_subset_of(res.patterns[j].pattern));
        }
    }
}

TEST(Enumerate, MatchesExhaustiveSearch) {
    Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = static_cast<int>(rng.uniform_int(1, 12));
        const auto c = random_lengths(rng, m);
        const double P = static_cast<double>(rng.uniform_int(40, 400));
        const double gamma = std::array{1.5, 2.0, 3.0}[rng.index(3)];
        const auto res = enumerate_patterns(c, {P, 1, gamma});
        EXPECT_EQ(masks_of(res), minimal_masks(c, P, 1, gamma)) << "trial " << trial;
        for (const auto& p : res.patterns) EXPECT_TRUE(replay_ok(c, p.pattern.bits(), P, 1, gamma));
    }
}

TEST(Enumerate, RollingEqualsFullTable) {
    Rng rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = static_cast<int>(rng.uniform_int(1, 8));
        const auto c = random_lengths(rng, m);
        const EnergyModel em{static_cast<double>(rng.uniform_int(40, 300)), 1, 2};
        const auto a = enumerate_patterns(c, em, {20, TableMode::Rolling});
        const auto b = enumerate_patterns(c, em, {20, TableMode::Full});
        EXPECT_EQ(format_patterns(a), format_patterns(b));
    }
}

TEST(Enumerate, TerminalStatesFinishUncharged) {
    // a minimal pattern's last set bit leaves enough battery for the rest
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = static_cast<int>(rng.uniform_int(2, 10));
        const auto c = random_lengths(rng, m);
        const EnergyModel em{static_cast<double>(rng.uniform_int(60, 300)), 1, 2};
        for (const auto& p : enumerate_patterns(c, em).patterns) EXPECT_GE(p.final_battery, -kTolerance);
    }
}

TEST(Enumerate, ExtraChargingNeverHurts) {
    Rng rng(37);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = static_cast<int>(rng.uniform_int(1, 10));
        const auto c = random_lengths(rng, m);
        const EnergyModel em{static_cast<double>(rng.uniform_int(40, 300)), 1, 2};
        const ChargePattern p(m, rng.next() & ((std::uint64_t{1} << m) - 1));
        ChargePattern q = p;
        q.set(static_cast<int>(rng.index(static_cast<std::size_t>(m))));
        const auto tp = energy_profile(c, p, em), tq = energy_profile(c, q, em);
        for (std::size_t k = 0; k < tp.size(); ++k) EXPECT_GE(tq[k], tp[k] - 1e-9);
    }
}

TEST(Enumerate, LongRouteFallsBackToGreedy) {
    std::vector<double> c(25, 10.0);
    const auto res = enumerate_patterns(c, {60, 1, 2}, {20, TableMode::Rolling});
    EXPECT_TRUE(res.fallback);
    ASSERT_EQ(res.patterns.size(), 1U);
    EXPECT_TRUE(replay_ok(c, res.patterns[0].pattern.bits(), 60, 1, 2));
}

TEST(Enumerate, BruteForceAgrees) {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = static_cast<int>(rng.uniform_int(1, 9));
        const auto c = random_lengths(rng, m);
        const EnergyModel em{static_cast<double>(rng.uniform_int(40, 300)), 1, 2};
        EXPECT_EQ(format_patterns(enumerate_patterns(c, em)), format_patterns(brute_force_patterns(c, em)));
    }
}

TEST(Prune, DropsSuperset) {
    EXPECT_EQ(prune_supersets(parse({"10101", "00101"})), parse({"00101"}));
}

TEST(Prune, EmptyStaysEmpty) { EXPECT_TRUE(prune_supersets({}).empty()); }

TEST(Prune, AntichainUnchanged) {
    const auto in = parse({"101", "011", "110"});
    auto out = prune_supersets(in);
    EXPECT_EQ(out.size(), 3U);
    for (const auto& p : in) EXPECT_NE(std::find(out.begin(), out.end(), p), out.end());
}

TEST(Prune, DuplicatesCollapse) { EXPECT_EQ(prune_supersets(parse({"011", "011"})).size(), 1U); }

TEST(Prune, LargeSetsMatchPairwise) {
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const int width = static_cast<int>(rng.uniform_int(6, 14));
        std::vector<ChargePattern> in;
        for (int i = 0; i < 600; ++i) in.emplace_back(width, rng.next() & ((std::uint64_t{1} << width) - 1));
        std::vector<ChargePattern> expect;
        for (const auto& a : in) {
            bool minimal = true;
            for (const auto& b : in)
                if (b != a && b.is_subset_of(a)) minimal = false;
            if (minimal && std::find(expect.begin(), expect.end(), a) == expect.end()) expect.push_back(a);
        }
        std::sort(expect.begin(), expect.end(), [](auto& x, auto& y) { return x.bits() < y.bits(); });
        EXPECT_EQ(prune_supersets(in), expect);
    }
}

TEST(Prune, MixedWidthsThrow) {
    EXPECT_THROW(prune_supersets({ChargePattern(3), ChargePattern(4)}), StructuralError);
}
