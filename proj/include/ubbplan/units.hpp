#pragma once

// Canonical units at the type boundary: durations are std::chrono (seconds,
// double rep), rates are bits/second, loss is a fraction. Percent and ms only
// enter through the named factories below.

#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>

#include "ubbplan/errors.hpp"

namespace ubbplan {

using Seconds = std::chrono::duration<double>;
using Milliseconds = std::chrono::duration<double, std::milli>;

constexpr Seconds from_ms(double ms) { return Milliseconds{ms}; }
constexpr double to_ms(Seconds s) { return Milliseconds{s}.count(); }

class BitRate {
public:
    constexpr BitRate() = default;
    constexpr explicit BitRate(double bits_per_second) : bps_{bits_per_second} {}

    static constexpr BitRate bps(double v) { return BitRate{v}; }
    static constexpr BitRate kbps(double v) { return BitRate{v * 1e3}; }
    static constexpr BitRate mbps(double v) { return BitRate{v * 1e6}; }
    static constexpr BitRate gbps(double v) { return BitRate{v * 1e9}; }

    constexpr double bits_per_second() const { return bps_; }
    constexpr double mbps() const { return bps_ / 1e6; }
    constexpr double gbps() const { return bps_ / 1e9; }

    constexpr auto operator<=>(const BitRate&) const = default;

    constexpr BitRate operator+(BitRate o) const { return BitRate{bps_ + o.bps_}; }
    constexpr BitRate& operator+=(BitRate o) { bps_ += o.bps_; return *this; }
    constexpr BitRate operator*(double k) const { return BitRate{bps_ * k}; }
    constexpr BitRate operator/(double k) const { return BitRate{bps_ / k}; }
    constexpr double operator/(BitRate o) const { return bps_ / o.bps_; }

private:
    double bps_ = 0.0;
};

constexpr BitRate operator*(double k, BitRate r) { return r * k; }

/// Packet-loss ratio stored as a fraction in [0, 1].
class LossRatio {
public:
    constexpr LossRatio() = default;

    static LossRatio from_fraction(double f) {
        if (!std::isfinite(f) || f < 0.0 || f > 1.0)
            throw ValidationError("loss ratio must be a fraction in [0, 1]");
        return LossRatio{f};
    }
    static LossRatio from_percent(double pct) { return from_fraction(pct / 100.0); }

    constexpr double fraction() const { return f_; }
    constexpr double percent() const { return f_ * 100.0; }

    constexpr auto operator<=>(const LossRatio&) const = default;

private:
    constexpr explicit LossRatio(double f) : f_{f} {}
    double f_ = 0.0;
};

/// Segment / payload size in bytes.
class Bytes {
public:
    constexpr Bytes() = default;
    constexpr explicit Bytes(std::uint64_t n) : n_{n} {}
    constexpr std::uint64_t count() const { return n_; }
    constexpr double bits() const { return static_cast<double>(n_) * 8.0; }
    constexpr auto operator<=>(const Bytes&) const = default;

private:
    std::uint64_t n_ = 0;
};

namespace literals {

constexpr BitRate operator""_bps(long double v) { return BitRate::bps(static_cast<double>(v)); }
constexpr BitRate operator""_bps(unsigned long long v) { return BitRate::bps(static_cast<double>(v)); }
constexpr BitRate operator""_kbps(long double v) { return BitRate::kbps(static_cast<double>(v)); }
constexpr BitRate operator""_kbps(unsigned long long v) { return BitRate::kbps(static_cast<double>(v)); }
constexpr BitRate operator""_Mbps(long double v) { return BitRate::mbps(static_cast<double>(v)); }
constexpr BitRate operator""_Mbps(unsigned long long v) { return BitRate::mbps(static_cast<double>(v)); }
constexpr BitRate operator""_Gbps(long double v) { return BitRate::gbps(static_cast<double>(v)); }
constexpr BitRate operator""_Gbps(unsigned long long v) { return BitRate::gbps(static_cast<double>(v)); }
constexpr Bytes operator""_B(unsigned long long v) { return Bytes{v}; }

} // namespace literals

} // namespace ubbplan
