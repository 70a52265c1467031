#pragma once

// Model specifications for the three nested regression families and their numeric design matrices.
// Substantive regressors are stored densely; subject-category dummies as a per-row index list.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "citeforecast/corpus.hpp"
#include "citeforecast/errors.hpp"
#include "citeforecast/numeric.hpp"
#include "citeforecast/stats.hpp"
#include "citeforecast/text.hpp"

namespace citeforecast {

enum class Family { full, reduced, completely_reduced };

inline constexpr std::array<Family, 3> kFamilies{Family::full, Family::reduced, Family::completely_reduced};

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::full: return "full";
        case Family::reduced: return "reduced";
        case Family::completely_reduced: return "completely_reduced";
    }
    return "?";
}

inline Family parse_family(std::string_view s) {
    if (s == "full") return Family::full;
    if (s == "reduced") return Family::reduced;
    if (s == "completely_reduced") return Family::completely_reduced;
    throw ConfigError("unknown model family '" + std::string(s) + "'");
}

inline constexpr std::string_view kInterceptName = "INTERCEPT";
inline constexpr std::string_view kDummyPrefix = "D_SUBCAT_";
inline constexpr std::string_view kResponseName = "L_IMPACT_t11";

struct ModelSpec {
    Family family = Family::full;
    int window = 0;               // 0..6
    std::string baseline_sc;      // empty: first code of the corpus universe
    bool include_intercept = true;

    bool operator==(const ModelSpec&) const = default;
};

inline void validate_spec(const ModelSpec& spec) {
    if (spec.window < 0 || spec.window > kMaxPredictorWindow)
        throw ConfigError("model window must be in [0, 6], got " + std::to_string(spec.window));
}

inline nlohmann::ordered_json to_json(const ModelSpec& s) {
    nlohmann::ordered_json j;
    j["family"] = std::string(to_string(s.family));
    j["window"] = s.window;
    j["baseline_sc"] = s.baseline_sc;
    j["include_intercept"] = s.include_intercept;
    return j;
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
    ModelSpec s;
    try {
        s.family = parse_family(j.at("family").get<std::string>());
        s.window = j.at("window").get<int>();
        s.baseline_sc = j.value("baseline_sc", std::string{});
        s.include_intercept = j.value("include_intercept", true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model spec: ") + e.what());
    }
    validate_spec(s);
    return s;
}

inline std::string l_impact_name(int window) { return "L_IMPACT_t" + std::to_string(window); }
inline std::string l_read_name(int window) { return "L_READ_t" + std::to_string(window); }
inline std::string dummy_name(std::string_view sc) { return std::string(kDummyPrefix) + std::string(sc); }
inline bool is_dummy_column(std::string_view name) { return name.substr(0, kDummyPrefix.size()) == kDummyPrefix; }

/// Substantive regressors of a specification (without intercept or SC dummies), in table order.
inline std::vector<std::string> substantive_regressors(const ModelSpec& spec) {
    validate_spec(spec);
    int t = spec.window;
    switch (spec.family) {
        case Family::full:
            return {l_impact_name(t), l_read_name(t), "L_AUTH",  "D_ENG", "D_FOREIGN", "D_FUNDING",
                    "D_OPEN",         "L_PAGES",      "L_IF",    "D_ART", "D_REW",     "L_REFER"};
        case Family::reduced: return {l_impact_name(t), "L_IF"};
        case Family::completely_reduced: return {l_impact_name(t)};
    }
    return {};
}

/// Document-type and subject-category indicators of one record.
struct DummyAssignment {
    int d_art = 0;
    int d_rew = 0;
    std::vector<std::string> active_scs;  // non-baseline categories set to 1, in record order
};

inline DummyAssignment encode_dummies(const PublicationRecord& record, const std::string& baseline_sc,
                                      std::span<const std::string> sc_universe) {
    DummyAssignment d;
    d.d_art = record.doc_type == DocType::article ? 1 : 0;
    d.d_rew = record.doc_type == DocType::review ? 1 : 0;
    for (const auto& sc : record.sc_codes) {
        if (!std::binary_search(sc_universe.begin(), sc_universe.end(), sc)) throw UnknownScError(sc);
        if (sc != baseline_sc) d.active_scs.push_back(sc);
    }
    return d;
}

/// Numeric regression problem. Columns are the dense block (intercept first when present) followed
/// by the indicator columns; `dummy_index` lists, per row, the indicator columns equal to 1.
class DesignMatrix {
public:
    DesignMatrix() = default;

    /// Dense-only matrix, mainly for tests and generic use.
    static DesignMatrix from_dense(std::vector<std::string> names, Eigen::MatrixXd x, Eigen::VectorXd y,
                                   bool has_intercept) {
        if (names.size() != static_cast<std::size_t>(x.cols()) || x.rows() != y.size())
            throw DomainError("design matrix dimensions do not agree");
        DesignMatrix m;
        m.dense_names_ = std::move(names);
        m.dense_ = std::move(x);
        m.response_ = std::move(y);
        m.has_intercept_ = has_intercept;
        m.dummy_offsets_.assign(static_cast<std::size_t>(m.dense_.rows()) + 1, 0);
        return m;
    }

    std::size_t rows() const { return static_cast<std::size_t>(dense_.rows()); }
    std::size_t cols() const { return dense_names_.size() + dummy_names_.size(); }
    std::size_t dense_cols() const { return dense_names_.size(); }
    bool has_intercept() const { return has_intercept_; }

    std::vector<std::string> column_names() const {
        std::vector<std::string> out = dense_names_;
        out.insert(out.end(), dummy_names_.begin(), dummy_names_.end());
        return out;
    }
    const std::vector<std::string>& dense_names() const { return dense_names_; }
    const std::vector<std::string>& dummy_names() const { return dummy_names_; }
    const Eigen::MatrixXd& dense() const { return dense_; }
    const Eigen::VectorXd& response() const { return response_; }
    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::optional<ModelSpec>& spec() const { return spec_; }
    /// Indicator columns with no member row, removed before fitting.
    const std::vector<std::string>& empty_dummies() const { return empty_dummies_; }

    /// Indicator columns (0-based within the dummy block) set in row i.
    std::span<const std::uint32_t> row_dummies(std::size_t i) const {
        return {dummy_index_.data() + dummy_offsets_[i], dummy_index_.data() + dummy_offsets_[i + 1]};
    }

    double value(std::size_t i, std::size_t j) const {
        if (j < dense_cols()) return dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        auto d = static_cast<std::uint32_t>(j - dense_cols());
        auto idx = row_dummies(i);
        return std::find(idx.begin(), idx.end(), d) != idx.end() ? 1.0 : 0.0;
    }

    /// Writes row i (all columns) into `out`, which must have cols() elements.
    void copy_row(std::size_t i, std::span<double> out) const {
        std::size_t p = dense_cols();
        for (std::size_t j = 0; j < p; ++j) out[j] = dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(p), out.end(), 0.0);
        for (auto d : row_dummies(i)) out[p + d] = 1.0;
    }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
        std::vector<double> buf(cols());
        for (std::size_t i = 0; i < rows(); ++i) {
            copy_row(i, buf);
            for (std::size_t j = 0; j < cols(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j];
        }
        return x;
    }

    /// Debug export: header = column names plus the response.
    std::string to_csv() const {
        auto names = column_names();
        names.emplace_back(kResponseName);
        std::string out = csv_join(names) + "\n";
        std::vector<double> buf(cols());
        for (std::size_t i = 0; i < rows(); ++i) {
            copy_row(i, buf);
            std::vector<std::string> f;
            for (double v : buf) f.push_back(exact_real(v));
            f.push_back(exact_real(response_[static_cast<Eigen::Index>(i)]));
            out += csv_join(f) + "\n";
        }
        return out;
    }

private:
    friend DesignMatrix build_matrix(const Corpus&, std::span<const NormalizedMeasures>, const ModelSpec&);

    std::vector<std::string> dense_names_;
    std::vector<std::string> dummy_names_;
    Eigen::MatrixXd dense_;
    Eigen::VectorXd response_;
    std::vector<std::uint32_t> dummy_index_;
    std::vector<std::size_t> dummy_offsets_{0};
    std::vector<std::string> row_ids_;
    std::vector<std::string> empty_dummies_;
    std::optional<ModelSpec> spec_;
    bool has_intercept_ = false;
};

namespace detail {

inline double substantive_value(const std::string& name, const PublicationRecord& r, const NormalizedMeasures& m,
                                const DummyAssignment& d, int window) {
    auto w = static_cast<std::size_t>(window);
    if (name.rfind("L_IMPACT_t", 0) == 0) return log_transform(m.impact[w]);
    if (name.rfind("L_READ_t", 0) == 0) return log_transform(m.readership[w]);
    if (name == "L_AUTH") return log_transform(static_cast<double>(r.n_authors));
    if (name == "L_PAGES") return log_transform(static_cast<double>(r.pages));
    if (name == "L_IF") return log_transform(r.impact_factor);
    if (name == "L_REFER") return log_transform(static_cast<double>(r.n_refs));
    if (name == "D_ART") return d.d_art;
    if (name == "D_REW") return d.d_rew;
    return feature_value(r, name);  // D_ENG, D_FOREIGN, D_FUNDING, D_OPEN
}

}  // namespace detail

/// Resolves an empty baseline to the first code of the universe (the reference category).
inline std::string resolve_baseline_sc(const Corpus& corpus, const std::string& requested) {
    const auto& universe = corpus.sc_universe();
    if (universe.empty()) throw EmptyCorpusError();
    if (requested.empty()) return universe.front();
    if (!std::binary_search(universe.begin(), universe.end(), requested)) throw UnknownScError(requested);
    return requested;
}

/// Rows follow corpus order. Columns: [INTERCEPT], substantive regressors, then one indicator per
/// non-baseline subject category in sorted code order (empty indicators are dropped and recorded).
inline DesignMatrix build_matrix(const Corpus& corpus, std::span<const NormalizedMeasures> measures, const ModelSpec& spec) {
    validate_spec(spec);
    if (corpus.empty()) throw EmptyCorpusError();
    if (measures.size() != corpus.size()) throw DomainError("measures do not match corpus size");

    DesignMatrix m;
    m.spec_ = spec;
    m.spec_->baseline_sc = resolve_baseline_sc(corpus, spec.baseline_sc);
    const std::string& baseline = m.spec_->baseline_sc;
    m.has_intercept_ = spec.include_intercept;

    if (spec.include_intercept) m.dense_names_.emplace_back(kInterceptName);
    auto substantive = substantive_regressors(spec);
    m.dense_names_.insert(m.dense_names_.end(), substantive.begin(), substantive.end());

    const auto& universe = corpus.sc_universe();
    std::vector<DummyAssignment> dummies;
    dummies.reserve(corpus.size());
    std::unordered_map<std::string, std::size_t> members;
    for (const auto& r : corpus.records()) {
        dummies.push_back(encode_dummies(r, baseline, universe));
        for (const auto& sc : dummies.back().active_scs) ++members[sc];
    }
    std::unordered_map<std::string, std::uint32_t> column_of;
    for (const auto& sc : universe) {
        if (sc == baseline) continue;
        if (members.count(sc) == 0) {
            m.empty_dummies_.push_back(dummy_name(sc));
            continue;
        }
        column_of.emplace(sc, static_cast<std::uint32_t>(m.dummy_names_.size()));
        m.dummy_names_.push_back(dummy_name(sc));
    }

    auto n = static_cast<Eigen::Index>(corpus.size());
    m.dense_.resize(n, static_cast<Eigen::Index>(m.dense_names_.size()));
    m.response_.resize(n);
    m.dummy_offsets_.assign(1, 0);
    m.row_ids_.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& r = corpus[i];
        const auto& meas = measures[i];
        auto row = static_cast<Eigen::Index>(i);
        Eigen::Index c = 0;
        if (spec.include_intercept) m.dense_(row, c++) = 1.0;
        for (const auto& name : substantive) m.dense_(row, c++) = detail::substantive_value(name, r, meas, dummies[i], spec.window);
        m.response_[row] = log_transform(meas.impact[static_cast<std::size_t>(citation_slot(kResponseWindow))]);
        std::vector<std::uint32_t> idx;
        for (const auto& sc : dummies[i].active_scs) idx.push_back(column_of.at(sc));
        std::sort(idx.begin(), idx.end());
        m.dummy_index_.insert(m.dummy_index_.end(), idx.begin(), idx.end());
        m.dummy_offsets_.push_back(m.dummy_index_.size());
        m.row_ids_.push_back(r.id);
    }
    return m;
}

}  // namespace citeforecast
