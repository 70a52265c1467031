#pragma once

// Ordinary least squares with inference.
//
// The augmented matrix [X | y] is reduced to a triangular factor by Householder QR applied to
// row blocks stacked under the running factor (tall-skinny QR), so the full dense matrix is never
// materialized. A second Householder pass over that factor visits columns in order and skips any
// column whose remaining norm falls below tolerance * (largest column norm); skipped columns are
// reported as aliased, which makes the later member of a dependent set the one that is dropped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "citeforecast/design.hpp"
#include "citeforecast/errors.hpp"
#include "citeforecast/special_functions.hpp"
#include "citeforecast/text.hpp"

namespace citeforecast {

struct Coefficient {
    std::string name;
    double estimate = 0;
    double std_error = 0;
    double t_value = 0;
    double p_value = 1;
};

struct FitResult {
    std::optional<ModelSpec> spec;
    std::vector<Coefficient> coefficients;  // fitted columns in design order
    std::vector<std::string> aliased;       // empty indicators, then columns dropped for dependence
    Eigen::VectorXd residuals;              // one per fitted row (empty when not requested)
    double rss = 0;
    double tss = 0;
    double r2 = 0;
    double adjusted_r2 = 0;
    double f_statistic = 0;
    double p_value_f = 1;
    double rse = 0;
    std::size_t dof = 0;
    std::size_t n = 0;
    bool has_intercept = false;

    std::size_t fitted_columns() const { return coefficients.size(); }

    const Coefficient* find(std::string_view name) const {
        for (const auto& c : coefficients)
            if (c.name == name) return &c;
        return nullptr;
    }

    double estimate(std::string_view name) const {
        const auto* c = find(name);
        if (!c) throw MissingFeatureError(std::string(name));
        return c->estimate;
    }
};

struct FitOptions {
    /// Rows to fit, repeats allowed (case resampling); empty means every row once, in order.
    std::span<const std::uint32_t> rows{};
    bool keep_residuals = true;
    double alias_tolerance = 1e-10;
    std::size_t block_rows = 2048;
};

/// 1 - (1 - r2)(n - 1)/(n - p - 1), with p the number of non-intercept fitted columns.
inline double adjusted_r2(double r2, std::size_t n, std::size_t p) {
    if (n <= p + 1) throw DomainError("adjusted_r2 requires n > p + 1");
    auto nd = static_cast<double>(n);
    auto pd = static_cast<double>(p);
    return 1.0 - (1.0 - r2) * (nd - 1.0) / (nd - pd - 1.0);
}

namespace detail {

// Triangular factor of the augmented matrix [X | y] restricted to the selected rows.
inline Eigen::MatrixXd augmented_triangular_factor(const DesignMatrix& m, const FitOptions& opt) {
    const auto p = static_cast<Eigen::Index>(m.cols());
    const Eigen::Index q = p + 1;
    const std::size_t n = opt.rows.empty() ? m.rows() : opt.rows.size();
    const std::size_t block = std::max<std::size_t>(opt.block_rows, 1);

    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(q, q);
    Eigen::MatrixXd work(q + static_cast<Eigen::Index>(block), q);
    std::vector<double> row(static_cast<std::size_t>(p));

    std::size_t i = 0;
    while (i < n) {
        Eigen::Index filled = 0;
        work.topRows(q) = r;
        for (; i < n && filled < static_cast<Eigen::Index>(block); ++i) {
            std::size_t src = opt.rows.empty() ? i : opt.rows[i];
            m.copy_row(src, row);
            auto dst = work.row(q + filled);
            for (Eigen::Index j = 0; j < p; ++j) dst[j] = row[static_cast<std::size_t>(j)];
            dst[p] = m.response()[static_cast<Eigen::Index>(src)];
            ++filled;
        }
        auto stacked = work.topRows(q + filled);
        Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(stacked);
        r = stacked.topRows(q).triangularView<Eigen::Upper>();
    }
    return r;
}

inline void check_finite(const DesignMatrix& m) {
    if (!m.dense().allFinite()) throw NonFiniteError("design matrix contains a non-finite value");
    if (!m.response().allFinite()) throw NonFiniteError("response contains a non-finite value");
}

inline void fill_inference(Coefficient& c, double variance_factor, double sigma2, double dof) {
    c.std_error = std::sqrt(std::max(0.0, sigma2 * variance_factor));
    if (c.std_error > 0) {
        c.t_value = c.estimate / c.std_error;
        c.p_value = t_tail(c.t_value, dof);
    } else if (c.estimate == 0) {
        c.t_value = 0;
        c.p_value = 1;
    } else {
        c.t_value = std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
        c.p_value = 0;
    }
}

}  // namespace detail

/// Least-squares fit with standard errors, t/p values, R^2, adjusted R^2, overall F and RSE.
/// Errors: NonFiniteError, UnderdeterminedError (rows <= fitted columns).
inline FitResult fit(const DesignMatrix& m, const FitOptions& opt = {}) {
    detail::check_finite(m);
    for (auto r : opt.rows)
        if (r >= m.rows()) throw DomainError("row index out of range");
    const std::size_t p = m.cols();
    const auto pe = static_cast<Eigen::Index>(p);
    const Eigen::Index q = pe + 1;

    const std::size_t n = opt.rows.empty() ? m.rows() : opt.rows.size();
    if (n == 0 || p == 0) throw UnderdeterminedError("nothing to fit");

    Eigen::MatrixXd work = detail::augmented_triangular_factor(m, opt);

    double max_norm = 0;
    for (Eigen::Index j = 0; j < pe; ++j) max_norm = std::max(max_norm, work.col(j).norm());
    const double tol = opt.alias_tolerance * max_norm;

    std::vector<Eigen::Index> kept;
    std::vector<Eigen::Index> dropped;
    Eigen::VectorXd scratch(q);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < pe; ++j) {
        auto tail = work.col(j).segment(k, q - k);
        if (!(tail.norm() > tol)) {
            dropped.push_back(j);
            continue;
        }
        Eigen::VectorXd essential(q - k - 1);
        double tau = 0, beta = 0;
        tail.makeHouseholder(essential, tau, beta);
        work.block(k, j, q - k, q - j).applyHouseholderOnTheLeft(essential, tau, scratch.data());
        kept.push_back(j);
        ++k;
    }
    if (k == 0) throw UnderdeterminedError("no estimable columns");
    if (n <= static_cast<std::size_t>(k))
        throw UnderdeterminedError("rows (" + std::to_string(n) + ") do not exceed fitted columns (" + std::to_string(k) + ")");

    Eigen::MatrixXd rk(k, k);
    for (Eigen::Index a = 0; a < k; ++a) rk.col(a) = work.col(kept[static_cast<std::size_t>(a)]).head(k);
    Eigen::VectorXd z = work.col(pe).head(k);
    Eigen::VectorXd beta = rk.triangularView<Eigen::Upper>().solve(z);
    Eigen::MatrixXd rinv = rk.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));

    // Full-length coefficient vector (aliased columns are zero) for residual evaluation.
    Eigen::VectorXd full = Eigen::VectorXd::Zero(pe);
    for (Eigen::Index a = 0; a < k; ++a) full[kept[static_cast<std::size_t>(a)]] = beta[a];
    const auto pd = static_cast<Eigen::Index>(m.dense_cols());
    Eigen::VectorXd all_resid = m.response() - m.dense() * full.head(pd);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (auto d : m.row_dummies(i)) all_resid[static_cast<Eigen::Index>(i)] -= full[pd + static_cast<Eigen::Index>(d)];
    Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        auto src = static_cast<Eigen::Index>(opt.rows.empty() ? i : opt.rows[i]);
        resid[static_cast<Eigen::Index>(i)] = all_resid[src];
        y[static_cast<Eigen::Index>(i)] = m.response()[src];
    }

    FitResult res;
    res.spec = m.spec();
    res.n = n;
    res.dof = n - static_cast<std::size_t>(k);
    const auto names = m.column_names();
    res.aliased = m.empty_dummies();
    for (auto j : dropped) res.aliased.push_back(names[static_cast<std::size_t>(j)]);
    res.has_intercept = m.has_intercept() && !kept.empty() && kept.front() == 0;

    res.rss = resid.squaredNorm();
    double ybar = res.has_intercept ? y.mean() : 0.0;
    res.tss = (y.array() - ybar).square().sum();

    const auto dof = static_cast<double>(res.dof);
    const std::size_t df_model = static_cast<std::size_t>(k) - (res.has_intercept ? 1 : 0);
    if (df_model == 0) {
        res.r2 = 0;
    } else if (res.tss > 0) {
        res.r2 = 1.0 - res.rss / res.tss;
    } else {
        res.r2 = 1.0;
    }
    if (res.has_intercept) {
        res.adjusted_r2 = adjusted_r2(res.r2, n, df_model);
    } else {
        res.adjusted_r2 = 1.0 - (1.0 - res.r2) * static_cast<double>(n) / dof;
    }
    if (df_model == 0) {
        res.f_statistic = 0;
        res.p_value_f = 1;
    } else if (res.rss == 0) {
        res.f_statistic = std::numeric_limits<double>::infinity();
        res.p_value_f = 0;
    } else {
        double explained = std::max(0.0, res.tss - res.rss);
        res.f_statistic = (explained / static_cast<double>(df_model)) / (res.rss / dof);
        res.p_value_f = f_tail(res.f_statistic, static_cast<double>(df_model), dof);
    }
    res.rse = std::sqrt(res.rss / dof);

    const double sigma2 = res.rss / dof;
    res.coefficients.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index a = 0; a < k; ++a) {
        Coefficient c;
        c.name = names[static_cast<std::size_t>(kept[static_cast<std::size_t>(a)])];
        c.estimate = beta[a];
        detail::fill_inference(c, rinv.row(a).squaredNorm(), sigma2, dof);
        res.coefficients.push_back(std::move(c));
    }
    if (opt.keep_residuals) res.residuals = std::move(resid);
    return res;
}

// --- prediction --------------------------------------------------------------------------------

struct Prediction {
    double log_scale = 0;        // fitted L_IMPACT_t11
    double back_transformed = 0;  // 10^log_scale - 1, floored at 0
};

/// Scores one feature vector keyed by design column name. The intercept needs no feature.
inline Prediction predict(const FitResult& fit, const std::map<std::string, double>& features) {
    Prediction out;
    for (const auto& c : fit.coefficients) {
        if (c.name == kInterceptName) {
            out.log_scale += c.estimate;
            continue;
        }
        auto it = features.find(c.name);
        if (it == features.end()) {
            // Indicators default to 0; substantive regressors are mandatory.
            if (is_dummy_column(c.name)) continue;
            throw MissingFeatureError(c.name);
        }
        out.log_scale += c.estimate * it->second;
    }
    out.back_transformed = std::max(0.0, std::pow(10.0, out.log_scale) - 1.0);
    return out;
}

// --- reporting ---------------------------------------------------------------------------------

struct StarThresholds {
    double three = 0.01;
    double two = 0.05;
    double one = 0.1;
};

inline std::string significance_stars(double p, const StarThresholds& s = {}) {
    if (p < s.three) return "***";
    if (p < s.two) return "**";
    if (p < s.one) return "*";
    return "";
}

namespace detail {

inline nlohmann::ordered_json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline double number_or_inf(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline std::string join_names(const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t i = 0; i < names.size(); ++i) s += (i ? ";" : "") + names[i];
    return s;
}

}  // namespace detail

inline nlohmann::ordered_json fit_to_json(const FitResult& f, const StarThresholds& stars = {}) {
    nlohmann::ordered_json j;
    if (f.spec) j["spec"] = to_json(*f.spec);
    j["response"] = std::string(kResponseName);
    auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
    for (const auto& c : f.coefficients) {
        nlohmann::ordered_json e;
        e["variable"] = c.name;
        e["estimate"] = c.estimate;
        e["std_error"] = c.std_error;
        e["t_value"] = detail::finite_or_null(c.t_value);
        e["p_value"] = c.p_value;
        e["stars"] = significance_stars(c.p_value, stars);
        coefs.push_back(std::move(e));
    }
    j["r2"] = f.r2;
    j["adjusted_r2"] = f.adjusted_r2;
    j["f_statistic"] = detail::finite_or_null(f.f_statistic);
    j["p_value_f"] = f.p_value_f;
    j["rse"] = f.rse;
    j["rss"] = f.rss;
    j["tss"] = f.tss;
    j["dof"] = f.dof;
    j["n"] = f.n;
    j["has_intercept"] = f.has_intercept;
    j["aliased"] = f.aliased;
    return j;
}

/// Restores everything but residuals from fit_to_json output.
inline FitResult fit_from_json(const nlohmann::json& j) {
    FitResult f;
    try {
        if (j.contains("spec")) f.spec = model_spec_from_json(j.at("spec"));
        for (const auto& e : j.at("coefficients")) {
            Coefficient c;
            c.name = e.at("variable").get<std::string>();
            c.estimate = e.at("estimate").get<double>();
            c.std_error = e.at("std_error").get<double>();
            c.t_value = e.at("t_value").is_null() ? std::copysign(std::numeric_limits<double>::infinity(), c.estimate)
                                                  : e.at("t_value").get<double>();
            c.p_value = e.at("p_value").get<double>();
            f.coefficients.push_back(std::move(c));
        }
        f.r2 = j.at("r2").get<double>();
        f.adjusted_r2 = j.at("adjusted_r2").get<double>();
        f.f_statistic = detail::number_or_inf(j.at("f_statistic"));
        f.p_value_f = j.at("p_value_f").get<double>();
        f.rse = j.at("rse").get<double>();
        f.rss = j.at("rss").get<double>();
        f.tss = j.at("tss").get<double>();
        f.dof = j.at("dof").get<std::size_t>();
        f.n = j.at("n").get<std::size_t>();
        f.has_intercept = j.at("has_intercept").get<bool>();
        f.aliased = j.at("aliased").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed fit file: ") + e.what());
    }
    return f;
}

/// Coefficient table, a blank line, then the one-row footer block.
inline std::string fit_to_csv(const FitResult& f, const StarThresholds& stars = {}) {
    std::string out = "variable,estimate,std_error,t_value,p_value,stars\n";
    for (const auto& c : f.coefficients)
        out += csv_join({c.name, fixed6(c.estimate), fixed6(c.std_error), fixed6(c.t_value), fixed6(c.p_value),
                         significance_stars(c.p_value, stars)}) +
               "\n";
    out += "\nadjusted_r2,f_statistic,p_value_f,rse,dof,n,aliased\n";
    out += csv_join({fixed6(f.adjusted_r2), fixed6(f.f_statistic), fixed6(f.p_value_f), fixed6(f.rse),
                     std::to_string(f.dof), std::to_string(f.n), detail::join_names(f.aliased)}) +
           "\n";
    return out;
}

}  // namespace citeforecast
