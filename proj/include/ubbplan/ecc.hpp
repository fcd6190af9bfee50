#pragma once

// Speed-up from edge-cloud platforms with a transparent cache, per access node
// and over the whole network as nodes are equipped one by one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ubbplan/errors.hpp"
#include "ubbplan/topology.hpp"
#include "ubbplan/units.hpp"

namespace ubbplan {

/// Loss with and without the edge platform. Off by default: loss is assumed
/// unchanged, which makes the speed-up a function of the RTT ratio only.
struct PlrOverride {
    LossRatio without_ecc;
    LossRatio with_ecc;
};

struct NodeEccConfig {
    NodeId node_id = 0;
    Seconds rtt_without{};  // end user to origin server
    Seconds rtt_with{};     // end user to the edge platform at this node
    double hit_ratio = 0.0;
    std::optional<PlrOverride> plr;
};

inline void validate(const NodeEccConfig& cfg) {
    const std::string node = "node " + std::to_string(cfg.node_id) + ": ";
    detail::require(cfg.rtt_with.count() > 0.0, node + "rtt_with must be > 0");
    detail::require(cfg.rtt_with <= cfg.rtt_without, node + "rtt_with must not exceed rtt_without");
    detail::require(cfg.hit_ratio >= 0.0 && cfg.hit_ratio <= 1.0, node + "hit ratio must be in [0, 1]");
    if (cfg.plr) {
        detail::require(cfg.plr->with_ecc.fraction() > 0.0 && cfg.plr->without_ecc.fraction() > 0.0,
                        node + "plr override values must be > 0");
        detail::require(cfg.plr->with_ecc <= cfg.plr->without_ecc,
                        node + "plr with ecc must not exceed plr without");
    }
}

struct PlacementPlan {
    std::vector<NodeId> order;       // deployment sequence over all access nodes
    std::size_t equipped_count = 0;  // first equipped_count entries carry a platform
};

struct SpeedupPoint {
    std::size_t equipped_count = 0;
    double network_speedup = 1.0;
};

struct SpeedupCurve {
    std::vector<SpeedupPoint> points;
};

/// SU = HR * (RTT / RTT_q - 1) + 1. With a loss override the distance ratio
/// becomes (RTT * sqrt(PLR)) / (RTT_q * sqrt(PLR_q)).
inline double node_speedup(const NodeEccConfig& cfg) {
    validate(cfg);
    double distance_ratio = cfg.rtt_without / cfg.rtt_with;
    if (cfg.plr)
        distance_ratio *= std::sqrt(cfg.plr->without_ecc.fraction() / cfg.plr->with_ecc.fraction());
    return cfg.hit_ratio * (distance_ratio - 1.0) + 1.0;
}

namespace detail {

inline constexpr double kShareTolerance = 1e-9;

/// Exact running sum kept as non-overlapping partials (Shewchuk). value()
/// returns the correctly rounded total, so the result does not depend on the
/// order of the terms and grows monotonically as non-negative terms are added.
class ExactSum {
public:
    void add(double x) {
        std::size_t i = 0;
        for (double y : partials_) {
            if (std::abs(x) < std::abs(y))
                std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0)
                partials_[i++] = lo;
            x = hi;
        }
        partials_.resize(i);
        partials_.push_back(x);
    }

    double value() const {
        std::size_t n = partials_.size();
        if (n == 0)
            return 0.0;
        double hi = partials_[--n];
        double lo = 0.0;
        while (n > 0) {
            const double x = hi;
            const double y = partials_[--n];
            hi = x + y;
            lo = y - (hi - x);
            if (lo != 0.0)
                break;
        }
        // Round half to even across the remaining partials.
        if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            if (y == x - hi)
                hi = x;
        }
        return hi;
    }

private:
    std::vector<double> partials_;
};

/// Per-order traffic shares and speed-up gains share*(SU-1), resolved once.
struct ResolvedPlacement {
    std::vector<double> gains;  // in placement order
    double total_share = 0.0;   // correctly rounded, independent of order
};

inline ResolvedPlacement resolve_placement(std::span<const NodeTraffic> traffic,
                                           std::span<const NodeEccConfig> configs,
                                           std::span<const NodeId> order, std::size_t equipped) {
    require(!traffic.empty(), "traffic list must be non-empty");
    require(equipped <= order.size(), "equipped count exceeds the number of nodes");

    std::unordered_map<NodeId, const NodeTraffic*> by_id;
    double share_sum = 0.0;
    for (const auto& t : traffic) {
        require(t.share >= 0.0, "traffic shares must be non-negative");
        require(by_id.emplace(t.node_id, &t).second, "duplicate node id " + std::to_string(t.node_id));
        share_sum += t.share;
    }
    require(std::abs(share_sum - 1.0) <= kShareTolerance, "traffic shares are not normalized");
    require(order.size() == traffic.size(), "placement order must list every access node exactly once");

    std::unordered_map<NodeId, const NodeEccConfig*> cfg_by_id;
    for (const auto& c : configs)
        require(cfg_by_id.emplace(c.node_id, &c).second, "duplicate ecc config for node " + std::to_string(c.node_id));

    ResolvedPlacement out;
    ExactSum total;
    out.gains.reserve(equipped);
    std::unordered_map<NodeId, bool> seen;
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto id = order[j];
        const auto it = by_id.find(id);
        require(it != by_id.end(), "unknown node id " + std::to_string(id));
        require(seen.emplace(id, true).second, "node id " + std::to_string(id) + " repeated in placement order");
        total.add(it->second->share);
        if (j < equipped) {
            const auto c = cfg_by_id.find(id);
            require(c != cfg_by_id.end(), "no ecc config for equipped node " + std::to_string(id));
            out.gains.push_back(it->second->share * (node_speedup(*c->second) - 1.0));
        }
    }
    out.total_share = total.value();
    return out;
}

} // namespace detail

/// NSU(k) = (sum_{equipped} share*SU + sum_{others} share) / sum share,
/// evaluated as (total + G) / total with G the exact sum of the equipped
/// gains, rounded once. NSU(0) is exactly 1 and the value only depends on
/// which nodes are equipped, not on their order.
inline double network_speedup(std::span<const NodeTraffic> traffic, std::span<const NodeEccConfig> configs,
                              const PlacementPlan& plan) {
    const auto r = detail::resolve_placement(traffic, configs, plan.order, plan.equipped_count);
    detail::ExactSum gain;
    for (const double g : r.gains)
        gain.add(g);
    return (r.total_share + gain.value()) / r.total_share;
}

/// NSU for k = 0..max_equipped along `order` (max_equipped defaults to all
/// nodes). Point k is bit-identical to network_speedup with equipped_count k.
inline SpeedupCurve speedup_curve(std::span<const NodeTraffic> traffic, std::span<const NodeEccConfig> configs,
                                  std::span<const NodeId> order,
                                  std::optional<std::size_t> max_equipped = std::nullopt) {
    const std::size_t kmax = max_equipped.value_or(order.size());
    const auto r = detail::resolve_placement(traffic, configs, order, kmax);
    SpeedupCurve curve;
    curve.points.reserve(kmax + 1);
    detail::ExactSum gain;
    curve.points.push_back({0, r.total_share / r.total_share});
    for (std::size_t k = 1; k <= kmax; ++k) {
        gain.add(r.gains[k - 1]);
        curve.points.push_back({k, (r.total_share + gain.value()) / r.total_share});
    }
    return curve;
}

/// Node ids by descending share*(SU-1), ties by ascending id. Maximizes
/// NSU(k) for every k among all orders.
inline std::vector<NodeId> greedy_order(std::span<const NodeTraffic> traffic,
                                        std::span<const NodeEccConfig> configs) {
    std::unordered_map<NodeId, const NodeEccConfig*> cfg_by_id;
    for (const auto& c : configs)
        cfg_by_id.emplace(c.node_id, &c);
    struct Keyed {
        NodeId id;
        double gain;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(traffic.size());
    for (const auto& t : traffic) {
        const auto c = cfg_by_id.find(t.node_id);
        detail::require(c != cfg_by_id.end(), "no ecc config for node " + std::to_string(t.node_id));
        keyed.push_back({t.node_id, t.share * (node_speedup(*c->second) - 1.0)});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.gain != b.gain)
            return a.gain > b.gain;
        return a.id < b.id;
    });
    std::vector<NodeId> order;
    order.reserve(keyed.size());
    for (const auto& k : keyed)
        order.push_back(k.id);
    return order;
}

inline constexpr double kDefaultMaxRttRatio = 1e4;

/// RTT / RTT_q that makes every node's speed-up equal target_nsu for the given
/// hit ratio. With uniform SU the network speed-up at full deployment equals
/// the same value.
inline double calibrate_uniform_scenario(double target_nsu, double hit_ratio,
                                         double max_ratio = kDefaultMaxRttRatio) {
    detail::require(std::isfinite(target_nsu) && target_nsu >= 1.0, "target network speed-up must be >= 1");
    detail::require(hit_ratio >= 0.0 && hit_ratio <= 1.0, "hit ratio must be in [0, 1]");
    detail::require(max_ratio >= 1.0, "max rtt ratio must be >= 1");
    if (target_nsu == 1.0)
        return 1.0;
    if (!(target_nsu - 1.0 <= hit_ratio * (max_ratio - 1.0)))
        throw InfeasibleError("target network speed-up " + std::to_string(target_nsu) +
                              " is unreachable with hit ratio " + std::to_string(hit_ratio) +
                              " and rtt ratio capped at " + std::to_string(max_ratio));
    return (target_nsu - 1.0) / hit_ratio + 1.0;
}

} // namespace ubbplan
