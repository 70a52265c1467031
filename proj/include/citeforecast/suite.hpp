#pragma once

// The full experiment: three nested families fitted at every predictor window, adjusted-R^2
// curves, nested-model F comparisons and subject-category dummy coefficient summaries.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "citeforecast/design.hpp"
#include "citeforecast/errors.hpp"
#include "citeforecast/numeric.hpp"
#include "citeforecast/ols.hpp"
#include "citeforecast/special_functions.hpp"
#include "citeforecast/stats.hpp"

namespace citeforecast {

enum class ComparisonPair { full_vs_reduced, full_vs_completely_reduced };

inline std::string_view to_string(ComparisonPair p) {
    return p == ComparisonPair::full_vs_reduced ? "full_vs_reduced" : "full_vs_completely_reduced";
}

/// Denominator convention of the nested F statistic.
enum class AnovaVariant {
    additional_columns,  // RSS_full / (n - p - 1), p = additional columns
    classical,           // RSS_full / (n - k_full)
};

inline std::string_view to_string(AnovaVariant v) {
    return v == AnovaVariant::additional_columns ? "additional_columns" : "classical";
}

struct AnovaResult {
    double f_value = 0;
    double p_value = 1;
    double df_denominator = 0;
};

namespace detail {

inline double checked_improvement(double rss_restricted, double rss_full) {
    if (!(rss_full >= 0) || !std::isfinite(rss_restricted) || !std::isfinite(rss_full))
        throw DomainError("anova: residual sums of squares must be finite and nonnegative");
    double diff = rss_restricted - rss_full;
    if (diff < 0) {
        if (-diff > 1e-9 * std::max(rss_full, rss_restricted))
            throw NestingViolationError("restricted model fits better than the full model");
        diff = 0;
    }
    return diff;
}

inline AnovaResult f_test(double diff, double rss_full, std::size_t p_additional, double df_den) {
    if (p_additional == 0) throw DomainError("anova: no additional columns");
    if (!(df_den > 0)) throw DomainError("anova: nonpositive denominator degrees of freedom");
    AnovaResult r;
    r.df_denominator = df_den;
    auto p = static_cast<double>(p_additional);
    if (rss_full == 0) {
        r.f_value = diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        r.f_value = (diff / p) / (rss_full / df_den);
    }
    r.p_value = f_tail(r.f_value, p, df_den);
    return r;
}

}  // namespace detail

/// F = ((RSS_restricted - RSS_full) / p) / (RSS_full / (n - p - 1)), p = additional full-model columns.
inline AnovaResult anova_f(double rss_restricted, double rss_full, std::size_t p_additional, std::size_t n) {
    if (n <= p_additional + 1) throw DomainError("anova: n must exceed p + 1");
    double diff = detail::checked_improvement(rss_restricted, rss_full);
    return detail::f_test(diff, rss_full, p_additional, static_cast<double>(n - p_additional - 1));
}

/// Same numerator, denominator on the full model's residual degrees of freedom.
inline AnovaResult anova_f_classical(double rss_restricted, double rss_full, std::size_t p_additional, std::size_t full_dof) {
    double diff = detail::checked_improvement(rss_restricted, rss_full);
    return detail::f_test(diff, rss_full, p_additional, static_cast<double>(full_dof));
}

struct ComparisonReport {
    int window = 0;
    ComparisonPair pair = ComparisonPair::full_vs_reduced;
    double rss_full = 0;
    double rss_restricted = 0;
    std::size_t p_additional = 0;
    std::size_t n = 0;
    double f_value = 0;
    double p_value = 1;
    AnovaVariant variant = AnovaVariant::additional_columns;
};

inline ComparisonReport compare(const FitResult& full, const FitResult& restricted, int window, ComparisonPair pair,
                                AnovaVariant variant) {
    if (full.n != restricted.n) throw DomainError("nested comparison on different row sets");
    if (full.fitted_columns() <= restricted.fitted_columns())
        throw NestingViolationError("full model has no additional fitted columns");
    ComparisonReport c;
    c.window = window;
    c.pair = pair;
    c.rss_full = full.rss;
    c.rss_restricted = restricted.rss;
    c.p_additional = full.fitted_columns() - restricted.fitted_columns();
    c.n = full.n;
    c.variant = variant;
    AnovaResult r = variant == AnovaVariant::additional_columns
                        ? anova_f(restricted.rss, full.rss, c.p_additional, full.n)
                        : anova_f_classical(restricted.rss, full.rss, c.p_additional, full.dof);
    c.f_value = r.f_value;
    c.p_value = r.p_value;
    return c;
}

/// Distribution of the subject-category dummy coefficients of one fit (quartiles: type 7).
struct ScCoefficientSummary {
    std::size_t count = 0;
    double mean = 0, median = 0, q1 = 0, q3 = 0, share_positive = 0;
};

inline ScCoefficientSummary sc_coefficient_summary(const FitResult& fit) {
    std::vector<double> v;
    for (const auto& c : fit.coefficients)
        if (is_dummy_column(c.name)) v.push_back(c.estimate);
    if (v.empty()) throw NoDummiesError();
    std::sort(v.begin(), v.end());
    ScCoefficientSummary s;
    s.count = v.size();
    RunningMoments m;
    std::size_t positive = 0;
    for (double x : v) {
        m.add(x);
        if (x > 0) ++positive;
    }
    s.mean = m.mean();
    s.median = quantile_sorted(v, 0.5);
    s.q1 = quantile_sorted(v, 0.25);
    s.q3 = quantile_sorted(v, 0.75);
    s.share_positive = static_cast<double>(positive) / static_cast<double>(v.size());
    return s;
}

struct SuiteOptions {
    std::string baseline_sc;  // empty: first subject category
    bool include_intercept = true;
    AnovaVariant variant = AnovaVariant::additional_columns;
    std::vector<Family> families{kFamilies.begin(), kFamilies.end()};
    unsigned workers = 1;
};

struct SuiteResult {
    std::map<std::pair<Family, int>, FitResult> fits;
    std::map<Family, std::vector<double>> r2_curve;  // adjusted R^2 for t = 0..6
    std::vector<ComparisonReport> comparisons;       // primary variant
    std::vector<ComparisonReport> alternate_comparisons;  // the other F denominator convention
    std::map<int, ScCoefficientSummary> sc_distributions;  // full-family fits
    std::string baseline_sc;
    AnovaVariant variant = AnovaVariant::additional_columns;

    const FitResult& at(Family f, int window) const { return fits.at({f, window}); }
};

/// Fits every requested (family, window) on the same rows, then assembles curves, comparisons and
/// dummy summaries. A failing fit aborts with the offending model named.
inline SuiteResult run_suite(const Corpus& corpus, std::span<const NormalizedMeasures> measures, const SuiteOptions& opt = {}) {
    if (corpus.empty()) throw EmptyCorpusError();
    SuiteResult out;
    out.baseline_sc = resolve_baseline_sc(corpus, opt.baseline_sc);
    out.variant = opt.variant;

    std::vector<ModelSpec> specs;
    for (Family f : opt.families)
        for (int t = 0; t <= kMaxPredictorWindow; ++t) specs.push_back({f, t, out.baseline_sc, opt.include_intercept});

    std::vector<FitResult> results(specs.size());
    parallel_for(specs.size(), opt.workers, [&](std::size_t i) {
        const auto& spec = specs[i];
        try {
            results[i] = fit(build_matrix(corpus, measures, spec));
        } catch (const Error& e) {
            std::string where = "model " + std::string(to_string(spec.family)) + " t=" + std::to_string(spec.window) + ": ";
            if (e.kind() == ErrorKind::numerical) throw DomainError(where + e.what());
            throw ConfigError(where + e.what());
        }
    });
    for (std::size_t i = 0; i < specs.size(); ++i) out.fits.emplace(std::make_pair(specs[i].family, specs[i].window), std::move(results[i]));

    for (Family f : opt.families) {
        auto& curve = out.r2_curve[f];
        for (int t = 0; t <= kMaxPredictorWindow; ++t) curve.push_back(out.at(f, t).adjusted_r2);
    }

    auto has = [&](Family f) { return std::find(opt.families.begin(), opt.families.end(), f) != opt.families.end(); };
    if (has(Family::full)) {
        AnovaVariant alternate =
            opt.variant == AnovaVariant::additional_columns ? AnovaVariant::classical : AnovaVariant::additional_columns;
        for (int t = 0; t <= kMaxPredictorWindow; ++t) {
            const auto& full = out.at(Family::full, t);
            for (auto [family, pair] : {std::pair{Family::reduced, ComparisonPair::full_vs_reduced},
                                        std::pair{Family::completely_reduced, ComparisonPair::full_vs_completely_reduced}}) {
                if (!has(family)) continue;
                try {
                    out.comparisons.push_back(compare(full, out.at(family, t), t, pair, opt.variant));
                    out.alternate_comparisons.push_back(compare(full, out.at(family, t), t, pair, alternate));
                } catch (const Error& e) {
                    throw NestingViolationError("comparison " + std::string(to_string(pair)) + " t=" + std::to_string(t) +
                                                ": " + e.what());
                }
            }
            bool any_dummy = std::any_of(full.coefficients.begin(), full.coefficients.end(),
                                         [](const Coefficient& c) { return is_dummy_column(c.name); });
            if (any_dummy) out.sc_distributions[t] = sc_coefficient_summary(full);
        }
        std::sort(out.comparisons.begin(), out.comparisons.end(), [](const auto& a, const auto& b) {
            return std::pair{a.pair, a.window} < std::pair{b.pair, b.window};
        });
        std::sort(out.alternate_comparisons.begin(), out.alternate_comparisons.end(), [](const auto& a, const auto& b) {
            return std::pair{a.pair, a.window} < std::pair{b.pair, b.window};
        });
    }
    return out;
}

// --- report files ------------------------------------------------------------------------------

inline std::string r2_curve_to_csv(const SuiteResult& s) {
    std::string out = "family,t,adjusted_r2\n";
    for (const auto& [family, curve] : s.r2_curve)
        for (std::size_t t = 0; t < curve.size(); ++t)
            out += csv_join({std::string(to_string(family)), std::to_string(t), fixed6(curve[t])}) + "\n";
    return out;
}

inline std::string anova_to_csv(const std::vector<ComparisonReport>& rows) {
    std::string out = "window,pair,f_value,p_value,rss_full,rss_restricted,p_additional,n\n";
    for (const auto& c : rows)
        out += csv_join({std::to_string(c.window), std::string(to_string(c.pair)), fixed6(c.f_value), fixed6(c.p_value),
                         fixed6(c.rss_full), fixed6(c.rss_restricted), std::to_string(c.p_additional), std::to_string(c.n)}) +
               "\n";
    return out;
}

inline std::string sc_dummies_to_csv(const SuiteResult& s) {
    std::string out = "window,mean,median,q1,q3,share_positive\n";
    for (const auto& [t, d] : s.sc_distributions)
        out += csv_join({std::to_string(t), fixed6(d.mean), fixed6(d.median), fixed6(d.q1), fixed6(d.q3),
                         fixed6(d.share_positive)}) +
               "\n";
    return out;
}

}  // namespace citeforecast
