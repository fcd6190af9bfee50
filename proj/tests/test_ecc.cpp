#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "ubbplan/ecc.hpp"

using namespace ubbplan;

namespace {

NodeEccConfig cfg(NodeId id, double ratio, double hr) {
    return NodeEccConfig{id, from_ms(20.0), from_ms(20.0 / ratio), hr, std::nullopt};
}

std::vector<NodeEccConfig> uniform_configs(const std::vector<NodeTraffic>& traffic, double su) {
    // HR = 1 makes SU equal to the RTT ratio.
    std::vector<NodeEccConfig> out;
    for (const auto& t : traffic)
        out.push_back(cfg(t.node_id, su, 1.0));
    return out;
}

} // namespace

TEST(NodeSpeedup, IdentityCases) {
    EXPECT_EQ(node_speedup(cfg(1, 4.0, 0.0)), 1.0);
    EXPECT_EQ(node_speedup(cfg(1, 1.0, 0.7)), 1.0);
}

TEST(NodeSpeedup, HalfHitRatioQuarterRtt) {
    EXPECT_DOUBLE_EQ(node_speedup(NodeEccConfig{1, from_ms(40.0), from_ms(10.0), 0.5, std::nullopt}), 2.5);
}

TEST(NodeSpeedup, Errors) {
    EXPECT_THROW(node_speedup(NodeEccConfig{1, from_ms(40.0), Seconds{0.0}, 0.5, std::nullopt}), ValidationError);
    EXPECT_THROW(node_speedup(NodeEccConfig{1, from_ms(10.0), from_ms(40.0), 0.5, std::nullopt}), ValidationError);
    EXPECT_THROW(node_speedup(NodeEccConfig{1, from_ms(40.0), from_ms(10.0), 1.5, std::nullopt}), ValidationError);
}

TEST(NodeSpeedup, LossOverrideScalesDistance) {
    NodeEccConfig c{1, from_ms(20.0), from_ms(10.0), 0.5, std::nullopt};
    c.plr = PlrOverride{LossRatio::from_percent(0.4), LossRatio::from_percent(0.1)};
    // distance ratio 2 * sqrt(4) = 4 -> 0.5 * 3 + 1
    EXPECT_DOUBLE_EQ(node_speedup(c), 2.5);
    c.plr = PlrOverride{LossRatio::from_percent(0.1), LossRatio::from_percent(0.4)};
    EXPECT_THROW(node_speedup(c), ValidationError);
}

TEST(NetworkSpeedup, TwoNodeHandEvaluation) {
    const std::vector<NodeTraffic> traffic{{.node_id = 1, .share = 0.7}, {.node_id = 2, .share = 0.3}};
    const std::vector<NodeEccConfig> configs{cfg(1, 2.0, 1.0), cfg(2, 4.0, 1.0)};
    EXPECT_NEAR(network_speedup(traffic, configs, {{1, 2}, 1}), 0.7 * 2 + 0.3, 1e-15);
    EXPECT_EQ(network_speedup(traffic, configs, {{1, 2}, 0}), 1.0);
    EXPECT_NEAR(network_speedup(traffic, configs, {{1, 2}, 2}), 0.7 * 2 + 0.3 * 4, 1e-15);
}

TEST(NetworkSpeedup, UniformEndpoints) {
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    const auto order = sort_by_traffic(traffic);
    for (const double su : {1.75, 3.0}) {
        const auto configs = uniform_configs(traffic, su);
        EXPECT_NEAR(network_speedup(traffic, configs, {order, 250}), su, 1e-12);
        EXPECT_EQ(network_speedup(traffic, configs, {order, 0}), 1.0);
    }
}

TEST(NetworkSpeedup, Errors) {
    const std::vector<NodeTraffic> traffic{{.node_id = 1, .share = 0.7}, {.node_id = 2, .share = 0.3}};
    const std::vector<NodeEccConfig> configs{cfg(1, 2.0, 1.0), cfg(2, 4.0, 1.0)};
    EXPECT_THROW(network_speedup(traffic, configs, {{1, 3}, 1}), ValidationError);
    EXPECT_THROW(network_speedup(traffic, configs, {{1, 1}, 1}), ValidationError);
    EXPECT_THROW(network_speedup(traffic, configs, {{1}, 1}), ValidationError);
    EXPECT_THROW(network_speedup(traffic, configs, {{1, 2}, 3}), ValidationError);
    const std::vector<NodeTraffic> unnormalized{{.node_id = 1, .share = 0.7}, {.node_id = 2, .share = 0.4}};
    EXPECT_THROW(network_speedup(unnormalized, configs, {{1, 2}, 1}), ValidationError);
    const std::vector<NodeEccConfig> partial{cfg(2, 4.0, 1.0)};
    EXPECT_THROW(network_speedup(traffic, partial, {{1, 2}, 1}), ValidationError);
    EXPECT_NO_THROW(network_speedup(traffic, partial, {{2, 1}, 1}));
}

TEST(SpeedupCurve, UniformClosedForm) {
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    const auto order = sort_by_traffic(traffic);
    const auto configs = uniform_configs(traffic, 1.75);
    const auto curve = speedup_curve(traffic, configs, order);
    ASSERT_EQ(curve.points.size(), 251u);
    std::unordered_map<NodeId, double> share;
    for (const auto& t : traffic)
        share[t.node_id] = t.share;
    long double cum = 0.0L;
    for (std::size_t k = 0; k <= 250; ++k) {
        if (k > 0)
            cum += share[order[k - 1]];
        EXPECT_NEAR(curve.points[k].network_speedup, static_cast<double>(1.0L + 0.75L * cum), 1e-12);
        EXPECT_EQ(curve.points[k].equipped_count, k);
    }
}

TEST(SpeedupCurve, PointsMatchSingleEvaluation) {
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    const auto order = sort_by_traffic(traffic);
    std::vector<NodeEccConfig> configs;
    oracle::Gen gen{41};
    for (const auto& t : traffic)
        configs.push_back(cfg(t.node_id, gen.uniform(1.0, 6.0), gen.uniform(0.0, 1.0)));
    const auto curve = speedup_curve(traffic, configs, order);
    for (std::size_t k = 0; k <= 250; k += 7)
        EXPECT_EQ(curve.points[k].network_speedup, network_speedup(traffic, configs, {order, k}));
}

TEST(SpeedupCurve, TruncatedAtEquippedCount) {
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    const auto order = sort_by_traffic(traffic);
    const auto configs = uniform_configs(traffic, 3.0);
    const auto empty = speedup_curve(traffic, configs, order, 0);
    ASSERT_EQ(empty.points.size(), 1u);
    EXPECT_EQ(empty.points[0].equipped_count, 0u);
    EXPECT_EQ(empty.points[0].network_speedup, 1.0);
}

TEST(SpeedupCurve, ReversedOrderIsPointwiseBelow) {
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    auto order = sort_by_traffic(traffic);
    const auto configs = uniform_configs(traffic, 1.75);
    const auto sorted = speedup_curve(traffic, configs, order);
    std::reverse(order.begin(), order.end());
    const auto reversed = speedup_curve(traffic, configs, order);
    for (std::size_t k = 1; k < 250; ++k)
        EXPECT_GT(sorted.points[k].network_speedup, reversed.points[k].network_speedup);
    EXPECT_EQ(sorted.points[250].network_speedup, reversed.points[250].network_speedup);
}

TEST(SpeedupCurve, ConcaveForHeaviestFirst) {
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    const auto order = sort_by_traffic(traffic);
    const auto curve = speedup_curve(traffic, uniform_configs(traffic, 3.0), order);
    for (std::size_t k = 1; k < 250; ++k) {
        const double left = curve.points[k].network_speedup - curve.points[k - 1].network_speedup;
        const double right = curve.points[k + 1].network_speedup - curve.points[k].network_speedup;
        EXPECT_LE(right, left + 1e-15);
    }
}

TEST(GreedyOrder, SortsByWeightedGain) {
    const std::vector<NodeTraffic> traffic{
        {.node_id = 1, .share = 0.5}, {.node_id = 2, .share = 0.3}, {.node_id = 3, .share = 0.2}};
    const std::vector<NodeEccConfig> configs{cfg(1, 1.2, 1.0), cfg(2, 3.0, 1.0), cfg(3, 2.0, 1.0)};
    // gains: 0.1, 0.6, 0.2
    EXPECT_EQ(greedy_order(traffic, configs), (std::vector<NodeId>{2, 3, 1}));
}

TEST(GreedyOrder, BeatsEveryPermutationSmall) {
    oracle::Gen gen{42};
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = gen.integer(1, 6);
        std::vector<NodeTraffic> traffic;
        std::vector<NodeEccConfig> configs;
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w)
            total += (x = gen.uniform(0.01, 1.0));
        for (std::size_t i = 0; i < n; ++i) {
            traffic.push_back({.node_id = i + 1, .share = w[i] / total});
            configs.push_back(cfg(i + 1, gen.uniform(1.0, 8.0), gen.uniform(0.0, 1.0)));
        }
        const auto greedy = greedy_order(traffic, configs);
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 1);
        for (std::size_t k = 0; k <= n; ++k) {
            const double g = network_speedup(traffic, configs, {greedy, k});
            double best = 0.0;
            auto p = perm;
            do {
                best = std::max(best, network_speedup(traffic, configs, {p, k}));
            } while (std::next_permutation(p.begin(), p.end()));
            EXPECT_EQ(g, best);
        }
    }
}

TEST(Calibration, Examples) {
    EXPECT_EQ(calibrate_uniform_scenario(1.0, 0.3), 1.0);
    EXPECT_EQ(calibrate_uniform_scenario(1.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(calibrate_uniform_scenario(1.75, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(calibrate_uniform_scenario(3.0, 0.5), 5.0);
    EXPECT_DOUBLE_EQ(node_speedup(NodeEccConfig{1, from_ms(25.0), from_ms(10.0), 0.5, std::nullopt}), 1.75);
}

TEST(Calibration, Infeasible) {
    EXPECT_THROW(calibrate_uniform_scenario(3.0, 0.0), InfeasibleError);
    EXPECT_THROW(calibrate_uniform_scenario(3.0, 0.1, 10.0), InfeasibleError);
    EXPECT_NO_THROW(calibrate_uniform_scenario(1.9, 0.1, 10.0));
    EXPECT_THROW(calibrate_uniform_scenario(0.9, 0.5), ValidationError);
    EXPECT_THROW(calibrate_uniform_scenario(2.0, 1.5), ValidationError);
}

TEST(EccProperties, SpeedupBoundsAndCalibrationRoundTrip) {
    oracle::Gen gen{43};
    for (int i = 0; i < oracle::kPropertyCases; ++i) {
        const double ratio = gen.uniform(1.0, 20.0);
        const double hr = gen.uniform(0.0, 1.0);
        const double su = node_speedup(cfg(1, ratio, hr));
        EXPECT_GE(su, 1.0);

        const double target = gen.uniform(1.0, 5.0);
        const double h = gen.uniform(0.05, 1.0);
        const double r = calibrate_uniform_scenario(target, h);
        const NodeEccConfig c{1, from_ms(30.0), from_ms(30.0 / r), h, std::nullopt};
        EXPECT_NEAR(node_speedup(c), target, 1e-12);
    }
}

TEST(EccProperties, CurveNonDecreasingForAnyOrder) {
    oracle::Gen gen{44};
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    std::vector<NodeEccConfig> configs;
    for (const auto& t : traffic)
        configs.push_back(cfg(t.node_id, gen.uniform(1.0, 6.0), gen.uniform(0.0, 1.0)));
    auto order = sort_by_traffic(traffic);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(order.begin(), order.end(), gen.engine());
        const auto curve = speedup_curve(traffic, configs, order);
        EXPECT_EQ(curve.points.front().network_speedup, 1.0);
        for (std::size_t k = 1; k < curve.points.size(); ++k)
            EXPECT_GE(curve.points[k].network_speedup, curve.points[k - 1].network_speedup);
        long double expect = 0.0L;
        for (const auto& t : traffic)
            expect += t.share * node_speedup(configs[t.node_id - 1]);
        EXPECT_NEAR(curve.points.back().network_speedup, static_cast<double>(expect), 1e-12);
    }
}

TEST(EccProperties, EquippedSetDeterminesSpeedup) {
    oracle::Gen gen{45};
    const auto traffic = access_shares(TopologyParams{}, TrafficDistribution{});
    std::vector<NodeEccConfig> configs;
    for (const auto& t : traffic)
        configs.push_back(cfg(t.node_id, gen.log_uniform(1.0, 100.0), gen.uniform(0.0, 1.0)));
    auto order = sort_by_traffic(traffic);
    const double full = network_speedup(traffic, configs, {order, order.size()});
    for (int i = 0; i < oracle::kPropertyCases; ++i) {
        const auto k = static_cast<std::size_t>(gen.integer(0, order.size()));
        std::shuffle(order.begin(), order.end(), gen.engine());
        const double before = network_speedup(traffic, configs, {order, k});
        // Reordering within the equipped prefix and within the rest changes nothing.
        auto other = order;
        std::shuffle(other.begin(), other.begin() + static_cast<std::ptrdiff_t>(k), gen.engine());
        std::shuffle(other.begin() + static_cast<std::ptrdiff_t>(k), other.end(), gen.engine());
        EXPECT_EQ(network_speedup(traffic, configs, {other, k}), before);
        EXPECT_EQ(network_speedup(traffic, configs, {order, order.size()}), full);
    }
}

TEST(ExactSum, OrderIndependentAndCorrectlyRounded) {
    detail::ExactSum a;
    for (const double x : {1e16, 1.0, -1e16, 1e-3})
        a.add(x);
    EXPECT_EQ(a.value(), 1.001);
    detail::ExactSum b;
    b.add(0.1);
    b.add(0.2);
    EXPECT_EQ(b.value(), 0.30000000000000004);
    detail::ExactSum half_even;
    for (const double x : {1.0, 0x1p-53, 0x1p-106})
        half_even.add(x);
    EXPECT_EQ(half_even.value(), 1.0 + 0x1p-52);
    EXPECT_EQ(detail::ExactSum{}.value(), 0.0);
}
