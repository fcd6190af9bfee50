#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ubbplan/errors.hpp"
#include "ubbplan/throughput.hpp"
#include "ubbplan/units.hpp"

namespace ubbplan {

struct ServiceProfile {
    std::string name;
    BitRate required_throughput;            // upper end of the published range
    std::optional<Seconds> max_rtt;
    bool live = false;
    std::optional<BitRate> range_min;       // lower end when the source gives a range
    std::optional<double> max_use_minutes;  // VR "max time of use"
    std::string notes;
};

inline void validate(const ServiceProfile& s) {
    detail::require(!s.name.empty(), "service name must be non-empty");
    detail::require(s.required_throughput.bits_per_second() > 0.0,
                    "service '" + s.name + "': required throughput must be > 0");
    detail::require(!s.max_rtt || s.max_rtt->count() > 0.0, "service '" + s.name + "': max_rtt must be > 0");
    detail::require(!s.range_min || *s.range_min <= s.required_throughput,
                    "service '" + s.name + "': range lower bound exceeds required throughput");
}

namespace detail {

inline ServiceProfile profile(std::string name, double mbps, bool live = false, std::string notes = {}) {
    ServiceProfile p;
    p.name = std::move(name);
    p.required_throughput = BitRate::mbps(mbps);
    p.live = live;
    p.notes = std::move(notes);
    return p;
}

inline ServiceProfile ranged(std::string name, double lo_mbps, double hi_mbps, bool live, std::string notes) {
    auto p = profile(std::move(name), hi_mbps, live, std::move(notes));
    p.range_min = BitRate::mbps(lo_mbps);
    return p;
}

inline ServiceProfile vr_stage(std::string name, double mbps, double minutes, std::string notes) {
    notes += "; max time of use " + std::to_string(static_cast<int>(minutes)) + " min";
    auto p = profile(std::move(name), mbps, false, std::move(notes));
    p.max_use_minutes = minutes;
    return p;
}

} // namespace detail

/// Video platform recommendations, 4K VoD/live figures and the four VR/AR
/// stages. Ranges keep their upper bound as the requirement.
inline std::vector<ServiceProfile> builtin_catalog() {
    using detail::profile;
    using detail::ranged;
    using detail::vr_stage;
    std::vector<ServiceProfile> c{
        profile("Netflix SD TV", 3.0),
        profile("Netflix HD TV", 5.0),
        profile("Netflix UHD", 25.0, false, "UHD TV"),
        profile("YouTube SD Smartphone", 0.5),
        profile("YouTube SD TV", 3.0),
        profile("YouTube HD Smartphone", 3.0),
        ranged("YouTube HD TV", 2.5, 5.0, false, "2.5 Mbit/s at 720p"),
        ranged("YouTube HD TV live", 7.0, 13.0, true, "live"),
        ranged("YouTube UHD", 15.0, 25.0, false, "UHD TV"),
        profile("Amazon Prime Video SD TV", 0.9),
        profile("Amazon Prime Video HD TV", 3.5),
        profile("Apple TV SD TV", 2.5),
        profile("Apple TV HD TV", 8.0, false, "1080p; 6.0 Mbit/s for 720p mid definition"),
        profile("DAZN SD Smartphone", 2.0),
        profile("DAZN HD Smartphone", 3.5),
        ranged("DAZN HD TV", 6.5, 8.0, false, "high frame rate"),
        profile("VoD-4K", 15.0, false, "4K UHD video on demand"),
        profile("live-4K", 25.0, true, "4K UHD live streaming"),
        vr_stage("MoVAR-ES", 25.0, 20.0, "early stage; 90 deg FOV; 2K 3840x1920; 8 bit; 30 fps; 165:1; 240p equiv."),
        vr_stage("MoVAR-EL", 100.0, 20.0, "entry level; 90 deg FOV; 4K 7680x3840; 8 bit; 30 fps; 165:1; SD equiv."),
        vr_stage("MoVAR-AE", 400.0, 60.0,
                 "advanced experience; 120 deg FOV; 8K 11520x5760; 10 bit; 60 fps; 215:1; HD equiv."),
        vr_stage("MoVAR-UE", 1000.0, 60.0,
                 "ultimate experience; 120 deg FOV; 16K 23040x11520; 12 bit; 120 fps; 350:1; UHD equiv."),
    };
    c.back().max_rtt = from_ms(1.0);
    return c;
}

inline const ServiceProfile* find_service(const std::vector<ServiceProfile>& catalog, std::string_view name) {
    const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& s) { return s.name == name; });
    return it == catalog.end() ? nullptr : &*it;
}

inline bool is_movar(const ServiceProfile& s) { return s.name.rfind("MoVAR", 0) == 0; }

// --- catalog override file -------------------------------------------------
//
// CSV, '#' comments, header line required:
//   name,throughput_mbps,live,max_rtt_ms,notes
// throughput_mbps is a single value or "lo-hi"; live is true/false; max_rtt_ms
// may be empty; notes is the remainder of the line and may contain commas.

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string{s.substr(b, e - b + 1)};
}

inline double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(!s.empty() && used == s.size() && std::isfinite(v), what + ": not a number: '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1" || s == "yes")
        return true;
    if (s == "false" || s == "0" || s == "no")
        return false;
    throw ValidationError(what + ": expected true/false, got '" + s + "'");
}

} // namespace detail

inline std::vector<ServiceProfile> parse_catalog(std::istream& in) {
    std::vector<ServiceProfile> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        std::vector<std::string> cols;
        std::string_view rest{t};
        for (int i = 0; i < 4; ++i) {
            const auto comma = rest.find(',');
            if (comma == std::string_view::npos)
                break;
            cols.push_back(detail::trim(rest.substr(0, comma)));
            rest.remove_prefix(comma + 1);
        }
        cols.push_back(detail::trim(rest));
        const std::string where = "catalog line " + std::to_string(lineno);
        detail::require(cols.size() == 5, where + ": expected 5 columns");
        if (!header_seen) {
            detail::require(cols[0] == "name" && cols[1] == "throughput_mbps" && cols[2] == "live" &&
                                cols[3] == "max_rtt_ms" && cols[4] == "notes",
                            where + ": header must be name,throughput_mbps,live,max_rtt_ms,notes");
            header_seen = true;
            continue;
        }
        ServiceProfile p;
        p.name = cols[0];
        const auto dash = cols[1].find('-', 1);
        if (dash != std::string::npos) {
            p.range_min = BitRate::mbps(detail::parse_number(detail::trim(cols[1].substr(0, dash)), where));
            p.required_throughput = BitRate::mbps(detail::parse_number(detail::trim(cols[1].substr(dash + 1)), where));
        } else {
            p.required_throughput = BitRate::mbps(detail::parse_number(cols[1], where));
        }
        p.live = detail::parse_bool(cols[2], where);
        if (!cols[3].empty())
            p.max_rtt = from_ms(detail::parse_number(cols[3], where));
        p.notes = cols[4];
        validate(p);
        detail::require(find_service(out, p.name) == nullptr, where + ": duplicate service '" + p.name + "'");
        out.push_back(std::move(p));
    }
    detail::require(header_seen, "catalog file has no header line");
    return out;
}

// --- MoVAR budget -----------------------------------------------------------

struct MovarParams {
    double total_pixels = 215e6;  // foveal 170M + peripheral 45M
    double bits_per_pixel = 8.0;
    double frame_rate = 30.0;
    double compression_min = 15.0;
    double compression_max = 30.0;
    /// Optional pre-compression workload divisor (foveated rendering); 1 = off.
    double foveation_divisor = 1.0;
};

inline void validate(const MovarParams& p) {
    detail::require(p.total_pixels > 0 && p.bits_per_pixel > 0 && p.frame_rate > 0 && p.compression_min > 0 &&
                        p.compression_max > 0 && p.foveation_divisor > 0,
                    "movar parameters must all be > 0");
    detail::require(p.compression_min <= p.compression_max, "compression_min must not exceed compression_max");
}

/// Figures printed alongside the pixel budget in the source material. They do
/// not follow from its own inputs, so they are reported, never substituted.
inline constexpr double kPrintedMovarGrossBps = 48e9;
inline constexpr double kPrintedMovarNetMinBps = 0.7e9;
inline constexpr double kPrintedMovarNetMaxBps = 1.4e9;

struct MovarRequirement {
    BitRate gross_rate;
    BitRate net_rate_min;
    BitRate net_rate_max;
    bool discrepancy = false;  // computed values differ from the printed ones
    std::string note;
};

inline MovarRequirement movar_requirement(const MovarParams& p) {
    validate(p);
    MovarRequirement r;
    r.gross_rate = BitRate{p.total_pixels * p.bits_per_pixel * p.frame_rate / p.foveation_divisor};
    r.net_rate_min = r.gross_rate / p.compression_max;
    r.net_rate_max = r.gross_rate / p.compression_min;

    auto differs = [](double a, double b) { return std::abs(a - b) > 0.005 * b; };
    r.discrepancy = differs(r.gross_rate.bits_per_second(), kPrintedMovarGrossBps) ||
                    differs(r.net_rate_min.bits_per_second(), kPrintedMovarNetMinBps) ||
                    differs(r.net_rate_max.bits_per_second(), kPrintedMovarNetMaxBps);
    std::ostringstream note;
    note << "computed gross " << r.gross_rate.gbps() << " Gbit/s, net " << r.net_rate_min.gbps() << "-"
         << r.net_rate_max.gbps() << " Gbit/s; printed reference figures: gross 48 Gbit/s, net 0.7-1.4 Gbit/s";
    if (r.discrepancy)
        note << " (DISCREPANCY: computed values reported)";
    r.note = note.str();
    return r;
}

// --- feasibility ------------------------------------------------------------

struct Feasibility {
    bool feasible = false;
    Constraint binding = Constraint::none;
    Seconds rtt_needed{};  // largest RTT meeting the requirement on this path's loss
    BitRate throughput_estimate;
};

inline Feasibility feasibility(const ServiceProfile& service, const PathMetrics& path) {
    validate(service);
    const auto est = mathis_throughput(path);
    Feasibility f;
    f.throughput_estimate = est.throughput;
    f.rtt_needed = required_rtt_for_throughput(service.required_throughput, path.plr, path.mss, path.c);
    if (path.bit_rate < service.required_throughput)
        f.binding = Constraint::bit_rate;
    else if (est.mathis_term < service.required_throughput)
        f.binding = Constraint::latency_loss;
    else if (service.max_rtt && path.rtt > *service.max_rtt)
        f.binding = Constraint::latency_loss;
    f.feasible = f.binding == Constraint::none;
    return f;
}

/// Rate after applying a compression gain `factor` >= 1. Live streams gain
/// little from this in practice; callers decide whether to warn.
inline BitRate compression_gain(BitRate current_rate, double factor) {
    detail::require(std::isfinite(factor) && factor >= 1.0, "compression factor must be >= 1");
    return current_rate / factor;
}

} // namespace ubbplan
