#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ubbplan/errors.hpp"

namespace ubbplan {

/// Zipf-like popularity: the rank-n item is requested with probability
/// proportional to n^-alpha.
struct ZipfCatalog {
    std::size_t n_items = 1;
    double alpha = 0.8;
};

/// Ideal transparent cache holding the top `stored_items` ranks.
struct CachePolicy {
    std::size_t stored_items = 0;
};

inline void validate(const ZipfCatalog& c) {
    detail::require(c.n_items >= 1, "catalog must hold at least one item");
    detail::require(std::isfinite(c.alpha) && c.alpha > 0.0, "zipf alpha must be > 0");
}

inline void validate(const ZipfCatalog& c, const CachePolicy& p) {
    validate(c);
    detail::require(p.stored_items <= c.n_items, "cache cannot store more items than the catalog holds");
}

namespace detail {

/// Neumaier-compensated running sum; the same sequence of add() calls always
/// yields the same value, which keeps prefix sums and one-off sums identical.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace detail

/// H(n, alpha) = sum_{j=1..n} j^-alpha, summed in ascending j.
inline double generalized_harmonic(std::size_t n, double alpha) {
    detail::CompensatedSum s;
    for (std::size_t j = 1; j <= n; ++j)
        s.add(std::pow(static_cast<double>(j), -alpha));
    return s.value();
}

/// Prefix sums H(k, alpha) for k = 0..N of one catalog. Immutable after
/// construction, so it can be shared between threads.
class ZipfPrefixSums {
public:
    explicit ZipfPrefixSums(const ZipfCatalog& catalog) : catalog_{catalog} {
        validate(catalog);
        prefix_.reserve(catalog.n_items + 1);
        prefix_.push_back(0.0);
        detail::CompensatedSum s;
        for (std::size_t j = 1; j <= catalog.n_items; ++j) {
            s.add(std::pow(static_cast<double>(j), -catalog.alpha));
            prefix_.push_back(s.value());
        }
    }

    const ZipfCatalog& catalog() const { return catalog_; }
    double harmonic(std::size_t k) const { return prefix_.at(k); }

    double hit_ratio(std::size_t stored_items) const {
        detail::require(stored_items <= catalog_.n_items, "cache cannot store more items than the catalog holds");
        if (stored_items == catalog_.n_items)
            return 1.0;
        return prefix_[stored_items] / prefix_.back();
    }

    /// Smallest K with hit_ratio(K) >= target.
    std::size_t min_items_for(double target) const {
        detail::require(target >= 0.0 && target <= 1.0, "target hit ratio must be in [0, 1]");
        std::size_t lo = 0;
        std::size_t hi = catalog_.n_items;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (hit_ratio(mid) >= target)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

private:
    ZipfCatalog catalog_;
    std::vector<double> prefix_;
};

inline double popularity(const ZipfCatalog& catalog, std::size_t rank) {
    validate(catalog);
    detail::require(rank >= 1 && rank <= catalog.n_items, "rank out of range");
    return std::pow(static_cast<double>(rank), -catalog.alpha) / generalized_harmonic(catalog.n_items, catalog.alpha);
}

inline double hit_ratio(const ZipfCatalog& catalog, const CachePolicy& policy) {
    validate(catalog, policy);
    if (policy.stored_items == catalog.n_items)
        return 1.0;
    detail::CompensatedSum s;
    double stored = 0.0;
    for (std::size_t j = 1; j <= catalog.n_items; ++j) {
        s.add(std::pow(static_cast<double>(j), -catalog.alpha));
        if (j == policy.stored_items)
            stored = s.value();
    }
    return stored / s.value();
}

inline double min_fraction_for_hit_ratio(const ZipfCatalog& catalog, double target_hr) {
    const ZipfPrefixSums sums{catalog};
    return static_cast<double>(sums.min_items_for(target_hr)) / static_cast<double>(catalog.n_items);
}

} // namespace ubbplan
