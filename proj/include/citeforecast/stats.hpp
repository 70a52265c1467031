#pragma once

// Field normalization against subject-category/year baselines, descriptive statistics,
// subject-category concentration and correlation matrices.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "citeforecast/corpus.hpp"
#include "citeforecast/errors.hpp"
#include "citeforecast/numeric.hpp"
#include "citeforecast/text.hpp"

namespace citeforecast {

enum class BaselineProvenance { external_file, computed_from_corpus };

inline std::string_view to_string(BaselineProvenance p) {
    return p == BaselineProvenance::external_file ? "external_file" : "computed_from_corpus";
}

/// Mean raw counts of one (subject category, publication year) cell, per window.
struct BaselineCell {
    std::array<double, 8> mean_citations{};                        // by citation_slot()
    std::array<double, kReadershipWindowCount> mean_readerships{};  // windows 0..6
};

struct BaselineTable {
    std::map<std::pair<std::string, int>, BaselineCell> entries;
    BaselineProvenance provenance = BaselineProvenance::computed_from_corpus;

    const BaselineCell* find(const std::string& sc, int year) const {
        auto it = entries.find({sc, year});
        return it == entries.end() ? nullptr : &it->second;
    }
};

/// Per-(SC, year) mean counts; a multi-category publication contributes fully to each of its SCs.
inline BaselineTable compute_baselines(const Corpus& corpus) {
    if (corpus.empty()) throw EmptyCorpusError();
    struct Acc {
        std::array<double, 8> cit{};
        std::array<double, kReadershipWindowCount> read{};
        std::size_t n = 0;
    };
    std::map<std::pair<std::string, int>, Acc> acc;
    for (const auto& r : corpus.records()) {
        for (const auto& sc : r.sc_codes) {
            auto& a = acc[{sc, r.pub_year}];
            for (std::size_t k = 0; k < 8; ++k) a.cit[k] += static_cast<double>(r.citations[k]);
            for (std::size_t k = 0; k < a.read.size(); ++k) a.read[k] += static_cast<double>(r.readerships[k]);
            ++a.n;
        }
    }
    BaselineTable table;
    table.provenance = BaselineProvenance::computed_from_corpus;
    for (const auto& [key, a] : acc) {
        BaselineCell cell;
        auto n = static_cast<double>(a.n);
        for (std::size_t k = 0; k < 8; ++k) cell.mean_citations[k] = a.cit[k] / n;
        for (std::size_t k = 0; k < a.read.size(); ++k) cell.mean_readerships[k] = a.read[k] / n;
        table.entries.emplace(key, cell);
    }
    return table;
}

/// CSV `sc,year,window,mean_citations,mean_readerships`; window 11 leaves mean_readerships blank.
inline std::string baselines_to_csv(const BaselineTable& table) {
    std::string out = "sc,year,window,mean_citations,mean_readerships\n";
    for (const auto& [key, cell] : table.entries) {
        for (int w : kCitationWindows) {
            auto slot = static_cast<std::size_t>(citation_slot(w));
            std::string read = w <= kMaxPredictorWindow ? exact_real(cell.mean_readerships[slot]) : "";
            out += csv_join({key.first, std::to_string(key.second), std::to_string(w),
                             exact_real(cell.mean_citations[slot]), read}) +
                   "\n";
        }
    }
    return out;
}

inline BaselineTable read_baselines(const std::string& path) {
    CsvTable csv = read_csv(path);
    const std::vector<std::string> want{"sc", "year", "window", "mean_citations", "mean_readerships"};
    if (csv.header != want) throw SchemaError(0, "*", "baseline header must be sc,year,window,mean_citations,mean_readerships");
    BaselineTable table;
    table.provenance = BaselineProvenance::external_file;
    std::map<std::pair<std::string, int>, std::pair<unsigned, unsigned>> seen;  // citation / readership bitmasks
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& f = csv.rows[i];
        std::size_t row = i + 1;
        auto year = parse_int(f[1]);
        if (!year) throw SchemaError(row, "year", "not an integer");
        auto window = parse_int(f[2]);
        if (!window || citation_slot(static_cast<int>(*window)) < 0) throw SchemaError(row, "window", "not a tracked window");
        int w = static_cast<int>(*window);
        auto slot = static_cast<std::size_t>(citation_slot(w));
        auto mc = parse_real(f[3]);
        if (!mc || !std::isfinite(*mc) || *mc < 0) throw SchemaError(row, "mean_citations", "expected a nonnegative number");
        auto key = std::make_pair(f[0], static_cast<int>(*year));
        auto& cell = table.entries[key];
        auto& mask = seen[key];
        cell.mean_citations[slot] = *mc;
        mask.first |= 1u << slot;
        if (w <= kMaxPredictorWindow) {
            auto mr = parse_real(f[4]);
            if (!mr || !std::isfinite(*mr) || *mr < 0)
                throw SchemaError(row, "mean_readerships", "expected a nonnegative number");
            cell.mean_readerships[slot] = *mr;
            mask.second |= 1u << slot;
        } else if (!f[4].empty()) {
            throw SchemaError(row, "mean_readerships", "must be blank for window 11");
        }
    }
    for (const auto& [key, mask] : seen)
        if (mask.first != 0xFFu || mask.second != 0x7Fu)
            throw SchemaError(0, "window", "incomplete windows for sc=" + key.first + " year=" + std::to_string(key.second));
    return table;
}

/// Field-normalized impact (citation windows, by slot) and readership (windows 0..6) of one record.
struct NormalizedMeasures {
    std::array<double, 8> impact{};
    std::array<double, kReadershipWindowCount> readership{};
};

/// Divides each count by its baseline mean. A multi-category record uses the arithmetic mean of its
/// categories' baselines as the denominator.
inline NormalizedMeasures normalize_measures(const PublicationRecord& record, const BaselineTable& baselines) {
    std::vector<const BaselineCell*> cells;
    cells.reserve(record.sc_codes.size());
    for (const auto& sc : record.sc_codes) {
        const auto* cell = baselines.find(sc, record.pub_year);
        if (!cell) throw MissingBaselineError(sc, record.pub_year, 0);
        cells.push_back(cell);
    }
    auto k = static_cast<double>(cells.size());
    NormalizedMeasures m;
    auto ratio = [&](std::int64_t count, double denom, int window) {
        if (count == 0) return 0.0;
        if (denom <= 0.0) throw ZeroBaselineError(record.id, window);
        return static_cast<double>(count) / denom;
    };
    for (std::size_t s = 0; s < 8; ++s) {
        double denom = 0;
        for (const auto* c : cells) denom += c->mean_citations[s];
        m.impact[s] = ratio(record.citations[s], denom / k, kCitationWindows[s]);
    }
    for (std::size_t s = 0; s < m.readership.size(); ++s) {
        double denom = 0;
        for (const auto* c : cells) denom += c->mean_readerships[s];
        m.readership[s] = ratio(record.readerships[s], denom / k, static_cast<int>(s));
    }
    return m;
}

inline std::vector<NormalizedMeasures> normalize_corpus(const Corpus& corpus, const BaselineTable& baselines) {
    std::vector<NormalizedMeasures> out;
    out.reserve(corpus.size());
    for (const auto& r : corpus.records()) out.push_back(normalize_measures(r, baselines));
    return out;
}

// --- variables ---------------------------------------------------------------------------------

/// Time-invariant publication features, in table order.
inline const std::vector<std::string>& feature_variable_names() {
    static const std::vector<std::string> names{"AUTH",  "D_ENG", "D_FOREIGN", "D_FUNDING", "D_OPEN",
                                                "PAGES", "IF",    "D_ART",     "D_REW",     "REFER"};
    return names;
}

/// Whether a feature is a 0/1 indicator (never log-transformed).
inline bool is_indicator(const std::string& name) { return name.rfind("D_", 0) == 0; }

inline double feature_value(const PublicationRecord& r, const std::string& name) {
    if (name == "AUTH") return static_cast<double>(r.n_authors);
    if (name == "D_ENG") return r.eng ? 1.0 : 0.0;
    if (name == "D_FOREIGN") return r.foreign ? 1.0 : 0.0;
    if (name == "D_FUNDING") return r.funding ? 1.0 : 0.0;
    if (name == "D_OPEN") return r.open ? 1.0 : 0.0;
    if (name == "PAGES") return static_cast<double>(r.pages);
    if (name == "IF") return r.impact_factor;
    if (name == "D_ART") return r.doc_type == DocType::article ? 1.0 : 0.0;
    if (name == "D_REW") return r.doc_type == DocType::review ? 1.0 : 0.0;
    if (name == "REFER") return static_cast<double>(r.n_refs);
    throw DomainError("unknown feature " + name);
}

inline std::string impact_name(int window) { return "IMPACT_t" + std::to_string(window); }
inline std::string read_name(int window) { return "READ_t" + std::to_string(window); }

struct DescriptiveRow {
    std::string variable;
    double mean = 0, std_dev = 0, min = 0, max = 0;
    bool std_dev_undefined = false;  // n = 1: std_dev reported as 0
};

namespace detail {

inline DescriptiveRow describe(std::string name, const std::vector<double>& values) {
    RunningMoments m;
    for (double v : values) m.add(v);
    DescriptiveRow row{std::move(name), m.mean(), m.sd(), m.min(), m.max(), m.count() < 2};
    return row;
}

}  // namespace detail

/// Mean, sample standard deviation, min and max of every analysed variable, in table order:
/// IMPACT_t11..t0, READ_t6..t0, then the publication features.
inline std::vector<DescriptiveRow> descriptive_table(const Corpus& corpus, std::span<const NormalizedMeasures> measures) {
    if (corpus.empty()) throw EmptyCorpusError();
    if (measures.size() != corpus.size()) throw DomainError("measures do not match corpus size");
    std::vector<DescriptiveRow> rows;
    std::vector<double> col(corpus.size());
    for (int s = 7; s >= 0; --s) {
        for (std::size_t i = 0; i < corpus.size(); ++i) col[i] = measures[i].impact[static_cast<std::size_t>(s)];
        rows.push_back(detail::describe(impact_name(kCitationWindows[static_cast<std::size_t>(s)]), col));
    }
    for (int w = kMaxPredictorWindow; w >= 0; --w) {
        for (std::size_t i = 0; i < corpus.size(); ++i) col[i] = measures[i].readership[static_cast<std::size_t>(w)];
        rows.push_back(detail::describe(read_name(w), col));
    }
    for (const auto& name : feature_variable_names()) {
        for (std::size_t i = 0; i < corpus.size(); ++i) col[i] = feature_value(corpus[i], name);
        rows.push_back(detail::describe(name, col));
    }
    return rows;
}

inline std::string descriptive_to_csv(const std::vector<DescriptiveRow>& rows) {
    std::string out = "variable,mean,std_dev,min,max,std_dev_undefined\n";
    for (const auto& r : rows)
        out += csv_join({r.variable, fixed6(r.mean), fixed6(r.std_dev), fixed6(r.min), fixed6(r.max),
                         r.std_dev_undefined ? "1" : "0"}) +
               "\n";
    return out;
}

/// Herfindahl-Hirschman index of subject-category shares, using full multi-assignment counts.
inline double hhi(const Corpus& corpus) {
    auto manifest = corpus_manifest(corpus);
    double total = static_cast<double>(manifest.assignment_count);
    double sum = 0;
    for (const auto& [sc, count] : manifest.per_sc) {
        double s = static_cast<double>(count) / total;
        sum += s * s;
    }
    return sum;
}

/// Sample Pearson correlation. Throws DegenerateInputError for fewer than 2 points or a constant input.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("pearson: length mismatch");
    if (x.size() < 2) throw DegenerateInputError("pearson: fewer than two observations");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Square correlation matrix; cells involving a constant column are missing (off the diagonal).
struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<std::optional<double>>> values;
    std::vector<std::string> degenerate;  // constant columns
};

enum class CorrelationScale { raw, log };

inline std::string_view to_string(CorrelationScale s) { return s == CorrelationScale::raw ? "raw" : "log"; }

inline CorrelationMatrix correlation_matrix(std::vector<std::string> names, const std::vector<std::vector<double>>& columns) {
    CorrelationMatrix m;
    m.names = std::move(names);
    std::size_t k = columns.size();
    std::vector<bool> constant(k, false);
    for (std::size_t j = 0; j < k; ++j) {
        const auto& c = columns[j];
        constant[j] = c.empty() || std::all_of(c.begin(), c.end(), [&](double v) { return v == c.front(); });
        if (constant[j]) m.degenerate.push_back(m.names[j]);
    }
    m.values.assign(k, std::vector<std::optional<double>>(k));
    for (std::size_t a = 0; a < k; ++a) {
        m.values[a][a] = 1.0;
        for (std::size_t b = a + 1; b < k; ++b) {
            if (constant[a] || constant[b]) continue;
            double r = pearson(columns[a], columns[b]);
            m.values[a][b] = r;
            m.values[b][a] = r;
        }
    }
    return m;
}

struct CorrelationSet {
    CorrelationMatrix impact;       // windows 0..6 and 11
    CorrelationMatrix readership;   // windows 0..6
    CorrelationMatrix features;     // time-invariant variables
    CorrelationScale scale = CorrelationScale::raw;
};

/// Impact autocorrelation, readership autocorrelation and feature cross-correlation. With the log
/// scale, every non-indicator variable passes through log_transform first.
inline CorrelationSet correlation_matrices(const Corpus& corpus, std::span<const NormalizedMeasures> measures,
                                           CorrelationScale scale = CorrelationScale::raw) {
    if (corpus.size() < 2) throw DegenerateInputError("correlation matrices need at least two records");
    auto tf = [&](double v) { return scale == CorrelationScale::log ? log_transform(v) : v; };
    std::size_t n = corpus.size();
    CorrelationSet set;
    set.scale = scale;
    {
        std::vector<std::string> names;
        std::vector<std::vector<double>> cols;
        for (std::size_t s = 0; s < 8; ++s) {
            names.push_back(impact_name(kCitationWindows[s]));
            std::vector<double> c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = tf(measures[i].impact[s]);
            cols.push_back(std::move(c));
        }
        set.impact = correlation_matrix(std::move(names), cols);
    }
    {
        std::vector<std::string> names;
        std::vector<std::vector<double>> cols;
        for (std::size_t s = 0; s < kReadershipWindowCount; ++s) {
            names.push_back(read_name(static_cast<int>(s)));
            std::vector<double> c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = tf(measures[i].readership[s]);
            cols.push_back(std::move(c));
        }
        set.readership = correlation_matrix(std::move(names), cols);
    }
    {
        std::vector<std::vector<double>> cols;
        for (const auto& name : feature_variable_names()) {
            std::vector<double> c(n);
            for (std::size_t i = 0; i < n; ++i) {
                double v = feature_value(corpus[i], name);
                c[i] = is_indicator(name) ? v : tf(v);
            }
            cols.push_back(std::move(c));
        }
        set.features = correlation_matrix(feature_variable_names(), cols);
    }
    return set;
}

inline std::string correlation_to_csv(const CorrelationMatrix& m) {
    std::vector<std::string> header{"variable"};
    header.insert(header.end(), m.names.begin(), m.names.end());
    std::string out = csv_join(header) + "\n";
    for (std::size_t a = 0; a < m.names.size(); ++a) {
        std::vector<std::string> row{m.names[a]};
        for (const auto& v : m.values[a]) row.push_back(v ? fixed6(*v) : "NA");
        out += csv_join(row) + "\n";
    }
    return out;
}

}  // namespace citeforecast
