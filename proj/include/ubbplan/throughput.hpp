#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "ubbplan/errors.hpp"
#include "ubbplan/units.hpp"

namespace ubbplan {

/// End-to-end channel seen by one TCP flow.
struct PathMetrics {
    Seconds rtt{};
    LossRatio plr{};
    Bytes mss{1460};
    double c = 1.0;  // congestion-control constant, typically 0.9 to 1.2
    BitRate bit_rate{};
};

inline void validate(const PathMetrics& p) {
    detail::require(std::isfinite(p.rtt.count()) && p.rtt.count() > 0.0, "rtt must be > 0");
    detail::require(p.plr.fraction() > 0.0, "plr must be in (0, 1]");
    detail::require(p.mss.count() > 0, "mss must be > 0");
    detail::require(p.c >= 0.5 && p.c <= 2.0, "c must be within [0.5, 2]");
    detail::require(std::isfinite(p.bit_rate.bits_per_second()) && p.bit_rate.bits_per_second() > 0.0,
                    "bit_rate must be > 0");
}

/// Loss split into the big-internet queuing part and the access/home physical-layer part.
struct PlrBreakdown {
    LossRatio plr1{};
    LossRatio plr2{};
};

enum class Constraint { latency_loss, bit_rate, none };

constexpr std::string_view to_string(Constraint c) {
    switch (c) {
    case Constraint::latency_loss: return "Latency-Loss";
    case Constraint::bit_rate: return "Bit-Rate";
    case Constraint::none: return "None";
    }
    return "?";
}

/// Upper-bound throughput estimate for a single flow. Never a measurement.
struct ThroughputEstimate {
    BitRate mathis_term;
    BitRate throughput;
    double utilization = 0.0;  // throughput / bit_rate
    Constraint limited_by = Constraint::latency_loss;
};

namespace detail {

inline BitRate mathis_term(Seconds rtt, LossRatio plr, Bytes mss, double c) {
    return BitRate{c * mss.bits() / (rtt.count() * std::sqrt(plr.fraction()))};
}

} // namespace detail

inline ThroughputEstimate mathis_throughput(const PathMetrics& path) {
    validate(path);
    ThroughputEstimate est;
    est.mathis_term = detail::mathis_term(path.rtt, path.plr, path.mss, path.c);
    if (path.bit_rate <= est.mathis_term) {
        est.throughput = path.bit_rate;
        est.limited_by = Constraint::bit_rate;
        est.utilization = 1.0;
    } else {
        est.throughput = est.mathis_term;
        est.limited_by = Constraint::latency_loss;
        est.utilization = est.throughput / path.bit_rate;
    }
    return est;
}

/// Grids of the reference throughput table. The 0.1 ms column of the printed
/// table is off by a factor of two (its values correspond to 0.05 ms), so it
/// is not part of the default grid.
inline constexpr std::array<double, 20> kReferenceRttGridMs{
    0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0,
    5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0};
inline constexpr std::array<double, 13> kReferencePlrGridPercent{
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 1.00};

/// Mathis term (BR excluded) for each (plr, rtt) pair. Rows follow plr_grid,
/// columns follow rtt_grid.
inline std::vector<std::vector<BitRate>> throughput_table(std::span<const Seconds> rtt_grid,
                                                          std::span<const LossRatio> plr_grid,
                                                          Bytes mss = Bytes{1460}, double c = 1.0) {
    detail::require(!rtt_grid.empty() && !plr_grid.empty(), "throughput table grids must be non-empty");
    std::vector<std::vector<BitRate>> table;
    table.reserve(plr_grid.size());
    for (const auto plr : plr_grid) {
        auto& row = table.emplace_back();
        row.reserve(rtt_grid.size());
        for (const auto rtt : rtt_grid) {
            // Unbounded BR: only the latency/loss side of the min is of interest.
            PathMetrics p{.rtt = rtt, .plr = plr, .mss = mss, .c = c, .bit_rate = BitRate{1e300}};
            row.push_back(mathis_throughput(p).mathis_term);
        }
    }
    return table;
}

/// Headroom buckets for the access-trap report.
enum class WasteBand { within_limit, mild, moderate, severe };

constexpr std::string_view to_string(WasteBand b) {
    switch (b) {
    case WasteBand::within_limit: return "within-limit";
    case WasteBand::mild: return "1-2x";
    case WasteBand::moderate: return "2-10x";
    case WasteBand::severe: return ">10x";
    }
    return "?";
}

constexpr WasteBand waste_band(double headroom) {
    if (headroom <= 1.0)
        return WasteBand::within_limit;
    if (headroom < 2.0)
        return WasteBand::mild;
    if (headroom < 10.0)
        return WasteBand::moderate;
    return WasteBand::severe;
}

struct TrapAssessment {
    BitRate required_rate;  // sum of the per-flow latency/loss bounds
    double headroom = 0.0;  // access_bit_rate / required_rate
    bool trapped = false;
    WasteBand band = WasteBand::within_limit;
};

/// Compares an access bit-rate with what the active flows can use given their
/// latency and loss. The per-flow constant is taken as 1 regardless of
/// PathMetrics::c; the flows' own bit_rate is ignored.
inline TrapAssessment ubb_trap_headroom(BitRate access_bit_rate, std::span<const PathMetrics> flows,
                                        double trap_threshold = 1.0) {
    detail::require(access_bit_rate.bits_per_second() > 0.0, "access bit-rate must be > 0");
    detail::require(!flows.empty(), "at least one flow is required");
    BitRate required{};
    for (const auto& f : flows) {
        validate(f);
        required += detail::mathis_term(f.rtt, f.plr, f.mss, 1.0);
    }
    TrapAssessment out;
    out.required_rate = required;
    out.headroom = access_bit_rate / required;
    out.trapped = out.headroom > trap_threshold;
    out.band = waste_band(out.headroom);
    return out;
}

inline LossRatio compose_plr(const PlrBreakdown& b) {
    const double total = b.plr1.fraction() + b.plr2.fraction();
    detail::require(total <= 1.0, "plr1 + plr2 must not exceed 1");
    return LossRatio::from_fraction(total);
}

/// Largest RTT at which the Mathis term still reaches `target`.
inline Seconds required_rtt_for_throughput(BitRate target, LossRatio plr, Bytes mss = Bytes{1460},
                                           double c = 1.0) {
    detail::require(std::isfinite(target.bits_per_second()) && target.bits_per_second() > 0.0,
                    "target throughput must be > 0");
    detail::require(plr.fraction() > 0.0, "plr must be in (0, 1]");
    detail::require(mss.count() > 0, "mss must be > 0");
    detail::require(c >= 0.5 && c <= 2.0, "c must be within [0.5, 2]");
    return Seconds{c * mss.bits() / (target.bits_per_second() * std::sqrt(plr.fraction()))};
}

} // namespace ubbplan
