#pragma once

// Three-tier model: core nodes, metro nodes on rings hanging off each core
// node, access nodes on rings hanging off each metro node. Rings only define
// parent relationships; no link capacities are modeled.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "ubbplan/errors.hpp"
#include "ubbplan/units.hpp"

namespace ubbplan {

using NodeId = std::size_t;

struct TopologyParams {
    std::size_t n_core = 5;
    std::size_t n_metro = 25;
    std::size_t n_access = 250;
    std::size_t metro_per_ring = 5;
    std::size_t access_per_ring = 10;
};

inline void validate(const TopologyParams& t) {
    detail::require(t.n_core >= 1 && t.n_metro >= 1 && t.n_access >= 1 && t.metro_per_ring >= 1 &&
                        t.access_per_ring >= 1,
                    "topology counts must all be >= 1");
    detail::require(t.n_metro == t.n_core * t.metro_per_ring,
                    "irregular topology: n_metro must equal n_core * metro_per_ring");
    detail::require(t.n_access == t.n_metro * t.access_per_ring,
                    "irregular topology: n_access must equal n_metro * access_per_ring");
}

struct TrafficDistribution {
    double metro_exponent = -0.6;
    double access_exponent = -0.99;
    BitRate total_throughput = BitRate::gbps(1.0);
};

inline void validate(const TrafficDistribution& d) {
    detail::require(std::isfinite(d.metro_exponent) && d.metro_exponent <= 0.0, "metro exponent must be <= 0");
    detail::require(std::isfinite(d.access_exponent) && d.access_exponent <= 0.0, "access exponent must be <= 0");
    detail::require(d.total_throughput.bits_per_second() > 0.0, "total throughput must be > 0");
}

struct NodeTraffic {
    NodeId node_id = 0;        // 1..n_access
    NodeId metro_id = 0;       // 1..n_metro
    std::size_t ring_position = 0;  // 1..access_per_ring within the parent's ring
    double share = 0.0;        // fraction of total network throughput
    BitRate throughput;
};

/// Shares proportional to i^exponent for i = 1..n, scaled so that they sum to
/// `total` (default 1). The normalizer is a direct sum. The last entry takes
/// total minus the sum of the others, so a left-to-right fold of the result
/// reproduces `total` bit for bit (the others sum to at least total/2, making
/// that subtraction exact).
inline std::vector<double> power_law_shares(std::size_t n, double exponent, double total = 1.0) {
    detail::require(n >= 1, "share count must be >= 1");
    std::vector<double> weights(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        weights[i] = std::pow(static_cast<double>(i + 1), exponent);
        norm += weights[i];
    }
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        weights[i] = total * (weights[i] / norm);
        head += weights[i];
    }
    weights[n - 1] = total - head;
    return weights;
}

inline std::vector<double> metro_shares(const TopologyParams& params, const TrafficDistribution& dist) {
    detail::require(params.n_metro >= 1, "n_metro must be >= 1");
    validate(dist);
    return power_law_shares(params.n_metro, dist.metro_exponent);
}

/// Access-node shares: metro share times the within-ring power-law share.
/// Access node ids run ring by ring, so metro i owns ids
/// (i-1)*access_per_ring + 1 .. i*access_per_ring.
inline std::vector<NodeTraffic> access_shares(const TopologyParams& params, const TrafficDistribution& dist) {
    validate(params);
    const auto metros = metro_shares(params, dist);
    std::vector<NodeTraffic> nodes;
    nodes.reserve(params.n_access);
    for (std::size_t m = 0; m < params.n_metro; ++m) {
        const auto ring = power_law_shares(params.access_per_ring, dist.access_exponent, metros[m]);
        for (std::size_t k = 0; k < ring.size(); ++k) {
            NodeTraffic nt;
            nt.node_id = m * params.access_per_ring + k + 1;
            nt.metro_id = m + 1;
            nt.ring_position = k + 1;
            nt.share = ring[k];
            nt.throughput = dist.total_throughput * ring[k];
            nodes.push_back(nt);
        }
    }
    return nodes;
}

/// Node ids by non-increasing share; equal shares keep ascending id order.
inline std::vector<NodeId> sort_by_traffic(std::span<const NodeTraffic> nodes) {
    detail::require(!nodes.empty(), "node list must be non-empty");
    std::vector<const NodeTraffic*> refs;
    refs.reserve(nodes.size());
    for (const auto& n : nodes)
        refs.push_back(&n);
    std::sort(refs.begin(), refs.end(), [](const NodeTraffic* a, const NodeTraffic* b) {
        if (a->share != b->share)
            return a->share > b->share;
        return a->node_id < b->node_id;
    });
    std::vector<NodeId> order;
    order.reserve(refs.size());
    for (const auto* r : refs)
        order.push_back(r->node_id);
    return order;
}

/// True when `order` is a permutation of 1..n.
inline bool is_permutation_of_ids(std::span<const NodeId> order, std::size_t n) {
    if (order.size() != n)
        return false;
    std::vector<bool> seen(n + 1, false);
    for (const auto id : order) {
        if (id < 1 || id > n || seen[id])
            return false;
        seen[id] = true;
    }
    return true;
}

/// Reads a placement-order override: one access-node id per line. Blank lines
/// and lines starting with '#' are skipped. The ids must be a permutation of
/// 1..n_access.
inline std::vector<NodeId> parse_order_override(std::istream& in, std::size_t n_access) {
    std::vector<NodeId> order;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        const auto token = line.substr(first, last - first + 1);
        std::size_t used = 0;
        unsigned long long id = 0;
        try {
            id = std::stoull(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size() || token.front() == '-')
            throw ValidationError("order file line " + std::to_string(lineno) + ": not a node id: '" + token + "'");
        order.push_back(static_cast<NodeId>(id));
    }
    if (!is_permutation_of_ids(order, n_access))
        throw ValidationError("order file must list each access node id 1.." + std::to_string(n_access) +
                              " exactly once");
    return order;
}

} // namespace ubbplan
