#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "citeforecast/errors.hpp"

namespace citeforecast {

/// log10(x + 1); zero maps to zero.
inline double log_transform(double x) {
    if (!std::isfinite(x) || x < 0) throw DomainError("log_transform requires a finite value >= 0");
    return std::log10(x + 1.0);
}

/// Welford running mean/variance. Constant input yields an exact mean and zero variance.
class RunningMoments {
public:
    void add(double x) {
        ++n_;
        double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
        if (n_ == 1) {
            min_ = max_ = x;
        } else {
            min_ = std::min(min_, x);
            max_ = std::max(max_, x);
        }
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double min() const { return min_; }
    double max() const { return max_; }
    /// Sample variance (n - 1); zero when fewer than two observations.
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }

private:
    std::size_t n_ = 0;
    double mean_ = 0, m2_ = 0, min_ = 0, max_ = 0;
};

/// Quantile by linear interpolation between order statistics (type 7). `sorted` must be ascending.
inline double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// SplitMix64 finalizer; used to derive independent sub-seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
    return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items are claimed dynamically,
/// so callers must write results by index. The first exception thrown by any item is rethrown.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    workers = std::max(1u, std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace citeforecast
