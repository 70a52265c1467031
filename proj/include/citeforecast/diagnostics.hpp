#pragma once

// Residual diagnostics and the case-resampling bootstrap of regression coefficients.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "citeforecast/design.hpp"
#include "citeforecast/errors.hpp"
#include "citeforecast/numeric.hpp"
#include "citeforecast/ols.hpp"
#include "citeforecast/special_functions.hpp"
#include "citeforecast/text.hpp"

namespace citeforecast {

struct HistogramBin {
    double left = 0;
    double width = 0;
    std::size_t count = 0;
};

struct ResidualHistogram {
    std::vector<HistogramBin> bins;
    std::vector<double> density_x;  // kernel density evaluation grid
    std::vector<double> density_y;
    double bandwidth = 0;
};

inline constexpr std::size_t kDensityPoints = 256;

/// ceil(sqrt(n)) capped at 100.
inline std::size_t default_bin_count(std::size_t n) {
    auto b = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    return std::clamp<std::size_t>(b, 1, 100);
}

/// Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling back to sd when the IQR is 0.
inline double silverman_bandwidth(std::span<const double> sorted) {
    RunningMoments m;
    for (double v : sorted) m.add(v);
    double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = iqr > 0 ? std::min(m.sd(), iqr / 1.34) : m.sd();
    return 0.9 * spread * std::pow(static_cast<double>(sorted.size()), -0.2);
}

/// Equal-width bins over [min, max] (right-open except the last) plus a Gaussian kernel density
/// sampled at 256 points over [min - 3h, max + 3h].
inline ResidualHistogram residual_histogram(std::span<const double> residuals, std::optional<std::size_t> bin_count = {}) {
    if (residuals.size() < 2) throw DegenerateInputError("histogram needs at least two residuals");
    std::vector<double> sorted(residuals.begin(), residuals.end());
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted.front(), hi = sorted.back();
    if (lo == hi) throw DegenerateInputError("all residuals are equal");
    std::size_t bins = bin_count.value_or(default_bin_count(sorted.size()));
    if (bins == 0) throw DomainError("bin_count must be at least 1");

    ResidualHistogram h;
    double width = (hi - lo) / static_cast<double>(bins);
    h.bins.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) h.bins[b] = {lo + static_cast<double>(b) * width, width, 0};
    for (double v : sorted) {
        auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
        ++h.bins[std::min(b, bins - 1)].count;
    }

    h.bandwidth = silverman_bandwidth(sorted);
    double from = lo - 3 * h.bandwidth, to = hi + 3 * h.bandwidth;
    double step = (to - from) / static_cast<double>(kDensityPoints - 1);
    double norm = 1.0 / (static_cast<double>(sorted.size()) * h.bandwidth * std::sqrt(2 * std::numbers::pi));
    h.density_x.resize(kDensityPoints);
    h.density_y.resize(kDensityPoints);
    for (std::size_t k = 0; k < kDensityPoints; ++k) {
        double x = from + static_cast<double>(k) * step;
        double sum = 0;
        for (double v : sorted) {
            double u = (x - v) / h.bandwidth;
            sum += std::exp(-0.5 * u * u);
        }
        h.density_x[k] = x;
        h.density_y[k] = sum * norm;
    }
    return h;
}

struct QqPoint {
    double theoretical = 0;
    double sample = 0;
};

/// Sorted standardized residuals against normal quantiles at plotting positions (i - 0.5) / n.
inline std::vector<QqPoint> qq_points(std::span<const double> residuals) {
    if (residuals.size() < 2) throw DegenerateInputError("Q-Q plot needs at least two residuals");
    RunningMoments m;
    for (double v : residuals) m.add(v);
    double sd = m.sd();
    if (!(sd > 0)) throw DegenerateInputError("residuals have zero variance");
    std::vector<double> z(residuals.begin(), residuals.end());
    for (double& v : z) v = (v - m.mean()) / sd;
    std::sort(z.begin(), z.end());
    std::vector<QqPoint> out(z.size());
    auto n = static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = {inverse_normal_cdf((static_cast<double>(i) + 0.5) / n), z[i]};
    return out;
}

// --- bootstrap ---------------------------------------------------------------------------------

struct BootstrapCoefficient {
    std::string variable;
    double original_estimate = 0;
    double bootstrap_mean = 0;
    double bias = 0;       // bootstrap_mean - original_estimate
    double std_error = 0;  // sample standard deviation of the resampled estimates
};

struct BootstrapReport {
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
    std::size_t retries = 0;  // resamples redrawn because the refit lost a column
    std::vector<BootstrapCoefficient> per_coefficient;
};

struct BootstrapOptions {
    std::size_t resamples = 500;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::size_t max_attempts = 100;  // per resample
};

namespace detail {

inline constexpr std::uint64_t kBootstrapStream = 0xB0075u;

// Draws n row indices with replacement, returned in ascending order.
inline std::vector<std::uint32_t> resample_rows(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    std::vector<std::uint32_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace detail

/// Case bootstrap: each resample draws n rows with replacement and refits. Resample b, attempt a
/// uses a sub-seed derived from (seed, b, a), so the report does not depend on the worker count.
/// A resample whose refit drops a column the original fit kept is redrawn with the next attempt.
inline BootstrapReport bootstrap(const DesignMatrix& m, const BootstrapOptions& opt) {
    if (opt.resamples == 0) throw DomainError("bootstrap needs at least one resample");
    FitOptions base;
    base.keep_residuals = false;
    FitResult original = fit(m, base);
    const std::size_t k = original.fitted_columns();

    std::vector<std::vector<double>> estimates(opt.resamples);
    std::vector<std::size_t> retries(opt.resamples, 0);
    parallel_for(opt.resamples, opt.workers, [&](std::size_t b) {
        for (std::size_t attempt = 0; attempt < opt.max_attempts; ++attempt) {
            auto seed = derive_seed(opt.seed, detail::kBootstrapStream, (static_cast<std::uint64_t>(b) << 20) + attempt);
            auto rows = detail::resample_rows(m.rows(), seed);
            FitOptions o = base;
            o.rows = rows;
            std::optional<FitResult> r;
            try {
                r = fit(m, o);
            } catch (const UnderdeterminedError&) {
            }
            if (r && r->fitted_columns() == k) {
                bool same = true;
                for (std::size_t j = 0; j < k && same; ++j) same = r->coefficients[j].name == original.coefficients[j].name;
                if (same) {
                    estimates[b].resize(k);
                    for (std::size_t j = 0; j < k; ++j) estimates[b][j] = r->coefficients[j].estimate;
                    return;
                }
            }
            ++retries[b];
        }
        throw UnderdeterminedError("bootstrap resample " + std::to_string(b) + " stayed rank-deficient after " +
                                   std::to_string(opt.max_attempts) + " attempts");
    });

    BootstrapReport rep;
    rep.resamples = opt.resamples;
    rep.seed = opt.seed;
    for (auto r : retries) rep.retries += r;
    for (std::size_t j = 0; j < k; ++j) {
        RunningMoments acc;
        for (std::size_t b = 0; b < opt.resamples; ++b) acc.add(estimates[b][j]);
        BootstrapCoefficient c;
        c.variable = original.coefficients[j].name;
        c.original_estimate = original.coefficients[j].estimate;
        c.bootstrap_mean = acc.mean();
        c.bias = c.bootstrap_mean - c.original_estimate;
        c.std_error = acc.sd();
        rep.per_coefficient.push_back(std::move(c));
    }
    return rep;
}

inline std::string bootstrap_to_csv(const BootstrapReport& r) {
    std::string out = "variable,original_estimate,bootstrap_mean,bias,std_error,retries\n";
    for (const auto& c : r.per_coefficient)
        out += csv_join({c.variable, fixed6(c.original_estimate), fixed6(c.bootstrap_mean), fixed6(c.bias),
                         fixed6(c.std_error), std::to_string(r.retries)}) +
               "\n";
    return out;
}

/// Bins and density samples side by side; the shorter column is padded with blanks.
inline std::string histogram_to_csv(const ResidualHistogram& h) {
    std::string out = "bin_left,bin_width,count,density_x,density_y\n";
    std::size_t rows = std::max(h.bins.size(), h.density_x.size());
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<std::string> f(5);
        if (i < h.bins.size()) {
            f[0] = fixed6(h.bins[i].left);
            f[1] = fixed6(h.bins[i].width);
            f[2] = std::to_string(h.bins[i].count);
        }
        if (i < h.density_x.size()) {
            f[3] = fixed6(h.density_x[i]);
            f[4] = fixed6(h.density_y[i]);
        }
        out += csv_join(f) + "\n";
    }
    return out;
}

inline std::string qq_to_csv(const std::vector<QqPoint>& points) {
    std::string out = "theoretical,sample\n";
    for (const auto& p : points) out += fixed6(p.theoretical) + "," + fixed6(p.sample) + "\n";
    return out;
}

}  // namespace citeforecast
