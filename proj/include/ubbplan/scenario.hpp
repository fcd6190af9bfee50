#pragma once

// Scenario files: JSON, strict schema (unknown keys are errors). Units are
// carried in key names (_ms, _percent, _mbps, _gbps, _bytes). See
// scenarios/SCHEMA.md for the full reference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubbplan/ecc.hpp"
#include "ubbplan/errors.hpp"
#include "ubbplan/services.hpp"
#include "ubbplan/throughput.hpp"
#include "ubbplan/topology.hpp"
#include "ubbplan/zipf.hpp"

namespace ubbplan {

struct NamedPath {
    std::string name;
    PathMetrics metrics;
    std::size_t flows = 1;  // identical concurrent flows on this access line
};

enum class OrderSource { traffic, greedy, file };

constexpr std::string_view to_string(OrderSource s) {
    switch (s) {
    case OrderSource::traffic: return "traffic";
    case OrderSource::greedy: return "greedy";
    case OrderSource::file: return "file";
    }
    return "?";
}

struct CacheSpec {
    std::optional<ZipfCatalog> catalog;
    double cache_fraction = 0.10;       // K/N when a Zipf catalog is given
    std::optional<double> hit_ratio;    // explicit uniform hit ratio instead
};

enum class EccMode { uniform, calibrate, per_node };

struct EccSpec {
    EccMode mode = EccMode::calibrate;
    Seconds rtt_without = from_ms(20.0);
    std::optional<Seconds> rtt_with;          // uniform mode
    std::optional<double> target_nsu;         // calibrate mode
    double max_rtt_ratio = kDefaultMaxRttRatio;
    std::vector<NodeEccConfig> nodes;         // per_node mode
    OrderSource order = OrderSource::traffic;
    std::vector<NodeId> order_override;       // filled when order == file
    std::optional<std::size_t> equipped_count;
};

struct ServiceRef {
    ServiceProfile profile;
    std::optional<double> compression_factor;
};

struct Scenario {
    std::string name;
    TopologyParams topology;
    TrafficDistribution traffic;
    CacheSpec cache;
    EccSpec ecc;
    std::vector<ServiceRef> services;
    std::vector<NamedPath> paths;
    double trap_threshold = 1.0;
    std::optional<MovarParams> movar;
    std::uint64_t content_hash = 0;
};

/// FNV-1a 64 over the raw scenario bytes; stamped into CSV metadata.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

using nlohmann::json;

inline void expect_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    require(j.is_object(), std::string{where} + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const auto a : allowed)
            ok = ok || key == a;
        require(ok, std::string{where} + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_as(const json& j, std::string_view where, std::string_view key) {
    try {
        return j.at(std::string{key}).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string{where} + "." + std::string{key} + ": " + e.what());
    }
}

template <typename T>
std::optional<T> get_opt(const json& j, std::string_view where, std::string_view key) {
    if (!j.contains(std::string{key}))
        return std::nullopt;
    return get_as<T>(j, where, key);
}

inline std::size_t get_count(const json& j, std::string_view where, std::string_view key) {
    const auto v = get_as<std::int64_t>(j, where, key);
    require(v >= 0, std::string{where} + "." + std::string{key} + ": must be >= 0");
    return static_cast<std::size_t>(v);
}

inline PathMetrics parse_path_metrics(const json& j, const std::string& where) {
    PathMetrics p;
    p.rtt = from_ms(get_as<double>(j, where, "rtt_ms"));
    p.plr = LossRatio::from_percent(get_as<double>(j, where, "plr_percent"));
    if (j.contains("mss_bytes")) {
        const auto mss = get_as<std::int64_t>(j, where, "mss_bytes");
        require(mss > 0, where + ".mss_bytes: must be > 0");
        p.mss = Bytes{static_cast<std::uint64_t>(mss)};
    }
    p.c = get_opt<double>(j, where, "c").value_or(1.0);
    p.bit_rate = BitRate::mbps(get_as<double>(j, where, "bit_rate_mbps"));
    try {
        validate(p);
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
    return p;
}

} // namespace detail

/// Parses a scenario document. `base_dir` resolves relative file references.
/// Service names resolve against `catalog`.
inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir,
                               const std::vector<ServiceProfile>& catalog) {
    using detail::expect_keys;
    using detail::get_as;
    using detail::get_count;
    using detail::get_opt;
    using detail::json;
    using detail::require;

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string{"scenario is not valid JSON: "} + e.what());
    }
    expect_keys(root, "scenario",
                {"name", "topology", "traffic", "cache", "ecc", "services", "paths", "trap_threshold", "movar"});

    Scenario s;
    s.content_hash = fnv1a64(text);
    s.name = get_opt<std::string>(root, "scenario", "name").value_or("unnamed");

    if (root.contains("topology")) {
        const auto& t = root["topology"];
        expect_keys(t, "topology", {"n_core", "n_metro", "n_access", "metro_per_ring", "access_per_ring"});
        auto& tp = s.topology;
        if (t.contains("n_core")) tp.n_core = get_count(t, "topology", "n_core");
        if (t.contains("n_metro")) tp.n_metro = get_count(t, "topology", "n_metro");
        if (t.contains("n_access")) tp.n_access = get_count(t, "topology", "n_access");
        if (t.contains("metro_per_ring")) tp.metro_per_ring = get_count(t, "topology", "metro_per_ring");
        if (t.contains("access_per_ring")) tp.access_per_ring = get_count(t, "topology", "access_per_ring");
    }
    validate(s.topology);

    if (root.contains("traffic")) {
        const auto& t = root["traffic"];
        expect_keys(t, "traffic", {"metro_exponent", "access_exponent", "total_throughput_gbps"});
        auto& d = s.traffic;
        d.metro_exponent = get_opt<double>(t, "traffic", "metro_exponent").value_or(d.metro_exponent);
        d.access_exponent = get_opt<double>(t, "traffic", "access_exponent").value_or(d.access_exponent);
        if (t.contains("total_throughput_gbps"))
            d.total_throughput = BitRate::gbps(get_as<double>(t, "traffic", "total_throughput_gbps"));
    }
    validate(s.traffic);

    if (root.contains("cache")) {
        const auto& c = root["cache"];
        expect_keys(c, "cache", {"n_items", "alpha", "cache_fraction", "hit_ratio"});
        const bool zipf = c.contains("n_items") || c.contains("alpha");
        require(zipf != c.contains("hit_ratio"), "cache: give either a Zipf catalog (n_items, alpha) or hit_ratio");
        if (zipf) {
            ZipfCatalog cat{get_count(c, "cache", "n_items"), get_as<double>(c, "cache", "alpha")};
            validate(cat);
            s.cache.catalog = cat;
            s.cache.cache_fraction = get_opt<double>(c, "cache", "cache_fraction").value_or(0.10);
            require(s.cache.cache_fraction >= 0.0 && s.cache.cache_fraction <= 1.0,
                    "cache.cache_fraction must be in [0, 1]");
        } else {
            require(!c.contains("cache_fraction"), "cache.cache_fraction requires a Zipf catalog");
            s.cache.hit_ratio = get_as<double>(c, "cache", "hit_ratio");
            require(*s.cache.hit_ratio >= 0.0 && *s.cache.hit_ratio <= 1.0, "cache.hit_ratio must be in [0, 1]");
        }
    } else {
        s.cache.catalog = ZipfCatalog{10000, 0.8};
    }

    if (root.contains("ecc")) {
        const auto& e = root["ecc"];
        expect_keys(e, "ecc",
                    {"mode", "rtt_without_ms", "rtt_with_ms", "target_nsu", "max_rtt_ratio", "nodes", "order",
                     "order_file", "equipped_count"});
        auto& ecc = s.ecc;
        const auto mode = get_opt<std::string>(e, "ecc", "mode").value_or("calibrate");
        if (mode == "uniform")
            ecc.mode = EccMode::uniform;
        else if (mode == "calibrate")
            ecc.mode = EccMode::calibrate;
        else if (mode == "per_node")
            ecc.mode = EccMode::per_node;
        else
            throw ValidationError("ecc.mode: expected uniform, calibrate or per_node, got '" + mode + "'");

        if (e.contains("rtt_without_ms"))
            ecc.rtt_without = from_ms(get_as<double>(e, "ecc", "rtt_without_ms"));
        require(ecc.rtt_without.count() > 0.0, "ecc.rtt_without_ms must be > 0");
        ecc.max_rtt_ratio = get_opt<double>(e, "ecc", "max_rtt_ratio").value_or(ecc.max_rtt_ratio);

        switch (ecc.mode) {
        case EccMode::uniform:
            ecc.rtt_with = from_ms(get_as<double>(e, "ecc", "rtt_with_ms"));
            require(!e.contains("target_nsu") && !e.contains("nodes"), "ecc: uniform mode takes rtt_with_ms only");
            break;
        case EccMode::calibrate:
            ecc.target_nsu = get_as<double>(e, "ecc", "target_nsu");
            require(!e.contains("rtt_with_ms") && !e.contains("nodes"), "ecc: calibrate mode takes target_nsu only");
            break;
        case EccMode::per_node: {
            require(!e.contains("rtt_with_ms") && !e.contains("target_nsu"), "ecc: per_node mode takes nodes only");
            const auto& nodes = e.at("nodes");
            require(nodes.is_array(), "ecc.nodes must be an array");
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const std::string where = "ecc.nodes[" + std::to_string(i) + "]";
                expect_keys(nodes[i], where, {"node_id", "rtt_without_ms", "rtt_with_ms", "hit_ratio"});
                NodeEccConfig cfg;
                cfg.node_id = get_count(nodes[i], where, "node_id");
                cfg.rtt_without = from_ms(get_as<double>(nodes[i], where, "rtt_without_ms"));
                cfg.rtt_with = from_ms(get_as<double>(nodes[i], where, "rtt_with_ms"));
                cfg.hit_ratio = get_as<double>(nodes[i], where, "hit_ratio");
                require(cfg.node_id >= 1 && cfg.node_id <= s.topology.n_access, where + ".node_id out of range");
                validate(cfg);
                ecc.nodes.push_back(cfg);
            }
            break;
        }
        }

        const auto order = get_opt<std::string>(e, "ecc", "order").value_or("traffic");
        if (order == "traffic") {
            ecc.order = OrderSource::traffic;
        } else if (order == "greedy") {
            ecc.order = OrderSource::greedy;
        } else if (order == "file") {
            ecc.order = OrderSource::file;
            const auto rel = get_as<std::string>(e, "ecc", "order_file");
            const auto path = base_dir / rel;
            std::ifstream in{path};
            require(static_cast<bool>(in), "ecc.order_file: cannot open '" + path.string() + "'");
            ecc.order_override = parse_order_override(in, s.topology.n_access);
        } else {
            throw ValidationError("ecc.order: expected traffic, greedy or file, got '" + order + "'");
        }
        require(ecc.order == OrderSource::file || !e.contains("order_file"), "ecc.order_file requires order \"file\"");
        if (e.contains("equipped_count")) {
            ecc.equipped_count = get_count(e, "ecc", "equipped_count");
            require(*ecc.equipped_count <= s.topology.n_access, "ecc.equipped_count exceeds n_access");
        }
    } else {
        s.ecc.target_nsu = 1.75;
    }

    if (root.contains("services")) {
        const auto& sv = root["services"];
        require(sv.is_array(), "services must be an array");
        for (std::size_t i = 0; i < sv.size(); ++i) {
            const std::string where = "services[" + std::to_string(i) + "]";
            ServiceRef ref;
            if (sv[i].is_string()) {
                const auto name = sv[i].get<std::string>();
                const auto* p = find_service(catalog, name);
                require(p != nullptr, where + ": unknown service '" + name + "'");
                ref.profile = *p;
            } else {
                expect_keys(sv[i], where,
                            {"name", "throughput_mbps", "live", "max_rtt_ms", "notes", "compression_factor", "base"});
                if (sv[i].contains("base")) {
                    const auto base = get_as<std::string>(sv[i], where, "base");
                    const auto* p = find_service(catalog, base);
                    require(p != nullptr, where + ".base: unknown service '" + base + "'");
                    ref.profile = *p;
                    if (sv[i].contains("name"))
                        ref.profile.name = get_as<std::string>(sv[i], where, "name");
                } else {
                    ref.profile.name = get_as<std::string>(sv[i], where, "name");
                    ref.profile.required_throughput = BitRate::mbps(get_as<double>(sv[i], where, "throughput_mbps"));
                }
                if (sv[i].contains("base") && sv[i].contains("throughput_mbps"))
                    ref.profile.required_throughput = BitRate::mbps(get_as<double>(sv[i], where, "throughput_mbps"));
                if (sv[i].contains("live"))
                    ref.profile.live = get_as<bool>(sv[i], where, "live");
                if (sv[i].contains("max_rtt_ms"))
                    ref.profile.max_rtt = from_ms(get_as<double>(sv[i], where, "max_rtt_ms"));
                if (sv[i].contains("notes"))
                    ref.profile.notes = get_as<std::string>(sv[i], where, "notes");
                ref.compression_factor = get_opt<double>(sv[i], where, "compression_factor");
                if (ref.compression_factor)
                    require(*ref.compression_factor >= 1.0, where + ".compression_factor must be >= 1");
            }
            try {
                validate(ref.profile);
            } catch (const ValidationError& e) {
                throw ValidationError(where + ": " + e.what());
            }
            s.services.push_back(std::move(ref));
        }
    }

    if (root.contains("paths")) {
        const auto& ps = root["paths"];
        require(ps.is_array(), "paths must be an array");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string where = "paths[" + std::to_string(i) + "]";
            expect_keys(ps[i], where, {"name", "rtt_ms", "plr_percent", "mss_bytes", "c", "bit_rate_mbps", "flows"});
            NamedPath np;
            np.name = get_as<std::string>(ps[i], where, "name");
            np.metrics = detail::parse_path_metrics(ps[i], where);
            if (ps[i].contains("flows"))
                np.flows = get_count(ps[i], where, "flows");
            require(np.flows >= 1, where + ".flows must be >= 1");
            for (const auto& other : s.paths)
                require(other.name != np.name, where + ": duplicate path name '" + np.name + "'");
            s.paths.push_back(std::move(np));
        }
    }

    s.trap_threshold = get_opt<double>(root, "scenario", "trap_threshold").value_or(1.0);
    require(s.trap_threshold > 0.0, "trap_threshold must be > 0");

    if (root.contains("movar")) {
        const auto& m = root["movar"];
        expect_keys(m, "movar",
                    {"total_pixels", "bits_per_pixel", "frame_rate", "compression_min", "compression_max",
                     "foveation_divisor"});
        MovarParams mp;
        mp.total_pixels = get_opt<double>(m, "movar", "total_pixels").value_or(mp.total_pixels);
        mp.bits_per_pixel = get_opt<double>(m, "movar", "bits_per_pixel").value_or(mp.bits_per_pixel);
        mp.frame_rate = get_opt<double>(m, "movar", "frame_rate").value_or(mp.frame_rate);
        mp.compression_min = get_opt<double>(m, "movar", "compression_min").value_or(mp.compression_min);
        mp.compression_max = get_opt<double>(m, "movar", "compression_max").value_or(mp.compression_max);
        mp.foveation_divisor = get_opt<double>(m, "movar", "foveation_divisor").value_or(mp.foveation_divisor);
        validate(mp);
        s.movar = mp;
    }
    return s;
}

inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {}) {
    return parse_scenario(text, base_dir, builtin_catalog());
}

inline Scenario load_scenario(const std::filesystem::path& file,
                              const std::vector<ServiceProfile>& catalog = builtin_catalog()) {
    std::ifstream in{file, std::ios::binary};
    if (!in)
        throw ValidationError("cannot open scenario file '" + file.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), file.parent_path(), catalog);
}

// --- model assembly ---------------------------------------------------------

/// Hit ratio every node's cache achieves under the scenario's cache spec.
inline double scenario_hit_ratio(const Scenario& s) {
    if (s.cache.hit_ratio)
        return *s.cache.hit_ratio;
    const auto& cat = *s.cache.catalog;
    const auto k = static_cast<std::size_t>(std::llround(s.cache.cache_fraction * static_cast<double>(cat.n_items)));
    return hit_ratio(cat, CachePolicy{std::min(k, cat.n_items)});
}

struct EccModel {
    std::vector<NodeTraffic> traffic;
    std::vector<NodeEccConfig> configs;
    std::vector<NodeId> order;
    std::vector<NodeId> traffic_order;
    std::vector<NodeId> greedy;
    std::optional<double> calibrated_ratio;
    double hit_ratio = 0.0;
};

/// Builds traffic shares, per-node configs and the placement order.
/// Throws InfeasibleError when calibration cannot reach the target.
inline EccModel build_ecc_model(const Scenario& s) {
    EccModel m;
    m.traffic = access_shares(s.topology, s.traffic);
    if (s.ecc.mode == EccMode::per_node) {
        m.configs = s.ecc.nodes;
    } else {
        m.hit_ratio = scenario_hit_ratio(s);
        Seconds rtt_with{};
        if (s.ecc.mode == EccMode::calibrate) {
            m.calibrated_ratio = calibrate_uniform_scenario(*s.ecc.target_nsu, m.hit_ratio, s.ecc.max_rtt_ratio);
            rtt_with = s.ecc.rtt_without / *m.calibrated_ratio;
        } else {
            rtt_with = *s.ecc.rtt_with;
        }
        for (const auto& t : m.traffic) {
            NodeEccConfig cfg{t.node_id, s.ecc.rtt_without, rtt_with, m.hit_ratio, std::nullopt};
            validate(cfg);
            m.configs.push_back(cfg);
        }
    }
    m.traffic_order = sort_by_traffic(m.traffic);
    const bool all_configured = m.configs.size() == m.traffic.size();
    if (all_configured)
        m.greedy = greedy_order(m.traffic, m.configs);
    switch (s.ecc.order) {
    case OrderSource::traffic: m.order = m.traffic_order; break;
    case OrderSource::greedy:
        detail::require(all_configured, "ecc.order greedy needs a config for every access node");
        m.order = m.greedy;
        break;
    case OrderSource::file: m.order = s.ecc.order_override; break;
    }
    return m;
}

} // namespace ubbplan
