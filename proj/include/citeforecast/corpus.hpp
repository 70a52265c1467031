#pragma once

// Publication data model, validation, CSV/JSONL ingestion and the corpus manifest.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "citeforecast/errors.hpp"
#include "citeforecast/text.hpp"

namespace citeforecast {

enum class DocType { article, review, proceedings };

inline std::string_view to_string(DocType t) {
    switch (t) {
        case DocType::article: return "article";
        case DocType::review: return "review";
        case DocType::proceedings: return "proceedings";
    }
    return "?";
}

inline std::optional<DocType> parse_doc_type(std::string_view s) {
    if (s == "article") return DocType::article;
    if (s == "review") return DocType::review;
    if (s == "proceedings") return DocType::proceedings;
    return std::nullopt;
}

/// Citation windows carried by every record, in slot order. Slot 7 is the long-term response.
inline constexpr std::array<int, 8> kCitationWindows{0, 1, 2, 3, 4, 5, 6, 11};
inline constexpr int kReadershipWindowCount = 7;  // windows 0..6
inline constexpr int kResponseWindow = 11;
inline constexpr int kMaxPredictorWindow = 6;

/// Slot index of a citation window, or -1 when the window is not tracked.
constexpr int citation_slot(int window) {
    if (window >= 0 && window <= 6) return window;
    if (window == 11) return 7;
    return -1;
}

struct PublicationRecord {
    std::string id;
    int pub_year = 0;
    DocType doc_type = DocType::article;
    std::int64_t n_authors = 1;
    bool eng = false;
    bool foreign = false;
    bool funding = false;
    bool open = false;
    std::int64_t pages = 1;
    std::int64_t n_refs = 0;
    double impact_factor = 0.0;
    std::vector<std::string> sc_codes;
    std::array<std::int64_t, 8> citations{};  // by citation_slot()
    std::array<std::int64_t, kReadershipWindowCount> readerships{};

    std::int64_t citations_at(int window) const { return citations.at(static_cast<std::size_t>(citation_slot(window))); }

    bool operator==(const PublicationRecord&) const = default;
};

/// Lists every violated record invariant. Never throws.
inline std::vector<std::string> validate_record(const PublicationRecord& r) {
    std::vector<std::string> v;
    if (r.id.empty()) v.emplace_back("empty id");
    if (r.n_authors < 1) v.emplace_back("n_authors < 1");
    if (r.pages < 1) v.emplace_back("pages < 1");
    if (r.n_refs < 0) v.emplace_back("n_refs < 0");
    if (!std::isfinite(r.impact_factor)) v.emplace_back("impact_factor not finite");
    else if (r.impact_factor < 0) v.emplace_back("impact_factor < 0");
    if (r.sc_codes.empty()) {
        v.emplace_back("empty sc_codes");
    } else {
        std::set<std::string> seen;
        for (const auto& sc : r.sc_codes) {
            if (sc.empty()) v.emplace_back("empty sc code");
            else if (!seen.insert(sc).second) v.emplace_back("duplicate sc code " + sc);
        }
    }
    if (std::any_of(r.citations.begin(), r.citations.end(), [](auto c) { return c < 0; }))
        v.emplace_back("negative citation count");
    if (!std::is_sorted(r.citations.begin(), r.citations.end())) v.emplace_back("non-monotone citations");
    if (std::any_of(r.readerships.begin(), r.readerships.end(), [](auto c) { return c < 0; }))
        v.emplace_back("negative readership count");
    if (!std::is_sorted(r.readerships.begin(), r.readerships.end())) v.emplace_back("non-monotone readerships");
    return v;
}

/// Immutable validated collection of publications. Records keep their input order.
class Corpus {
public:
    Corpus() = default;

    /// Throws DuplicateIdError on the first repeated id, ValidationError listing every invalid record.
    explicit Corpus(std::vector<PublicationRecord> records) : records_(std::move(records)) {
        std::vector<std::string> failures;
        std::set<std::string> universe;
        index_.reserve(records_.size());
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const auto& r = records_[i];
            if (!index_.emplace(r.id, i).second) throw DuplicateIdError(r.id);
            for (const auto& problem : validate_record(r)) failures.push_back("record " + r.id + ": " + problem);
            universe.insert(r.sc_codes.begin(), r.sc_codes.end());
        }
        if (!failures.empty()) throw ValidationError(std::move(failures));
        sc_universe_.assign(universe.begin(), universe.end());
    }

    std::span<const PublicationRecord> records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const PublicationRecord& operator[](std::size_t i) const { return records_[i]; }

    const PublicationRecord* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &records_[it->second];
    }

    /// Sorted, duplicate-free union of every record's subject categories.
    const std::vector<std::string>& sc_universe() const { return sc_universe_; }

    bool operator==(const Corpus& other) const { return records_ == other.records_; }

private:
    std::vector<PublicationRecord> records_;
    std::vector<std::string> sc_universe_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat { csv, jsonl };

inline CorpusFormat format_from_path(const std::string& path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".jsonl") || ends_with(".ndjson")) return CorpusFormat::jsonl;
    return CorpusFormat::csv;
}

inline const std::vector<std::string>& corpus_csv_columns() {
    static const std::vector<std::string> cols{
        "id",  "pub_year", "doc_type", "n_authors", "eng", "foreign", "funding", "open", "pages",
        "n_refs", "impact_factor", "sc_codes", "c0", "c1", "c2", "c3", "c4", "c5", "c6", "c11",
        "r0", "r1", "r2", "r3", "r4", "r5", "r6"};
    return cols;
}

namespace detail {

inline std::vector<std::string> split_codes(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(';', start);
        if (end == std::string_view::npos) end = s.size();
        out.emplace_back(s.substr(start, end - start));
        start = end + 1;
    }
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

// Parses CSV cells, reporting failures with the row number and field name.
struct FieldReader {
    std::size_t row;

    std::int64_t count(std::string_view text, const char* field) const {
        auto v = parse_int(text);
        if (!v) throw SchemaError(row, field, "not an integer: '" + std::string(text) + "'");
        return *v;
    }
    bool flag(std::string_view text, const char* field) const {
        if (text == "0") return false;
        if (text == "1") return true;
        throw SchemaError(row, field, "expected 0 or 1, found '" + std::string(text) + "'");
    }
    double real(std::string_view text, const char* field) const {
        auto v = parse_real(text);
        if (!v) throw SchemaError(row, field, "not a number: '" + std::string(text) + "'");
        return *v;
    }
};

inline const char* const kCitationFields[8] = {"c0", "c1", "c2", "c3", "c4", "c5", "c6", "c11"};
inline const char* const kReadFields[7] = {"r0", "r1", "r2", "r3", "r4", "r5", "r6"};

inline std::vector<PublicationRecord> read_csv_records(const std::string& path) {
    CsvTable table = read_csv(path);
    const auto& want = corpus_csv_columns();
    for (const auto& name : want)
        if (!table.column(name)) throw SchemaError(0, name, "missing column");
    for (const auto& name : table.header)
        if (std::find(want.begin(), want.end(), name) == want.end()) throw SchemaError(0, name, "unexpected column");

    std::array<std::size_t, 27> col{};
    for (std::size_t i = 0; i < want.size(); ++i) col[i] = *table.column(want[i]);

    std::vector<PublicationRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        FieldReader rd{r + 1};
        auto at = [&](std::size_t k) -> const std::string& { return f[col[k]]; };
        PublicationRecord rec;
        rec.id = at(0);
        rec.pub_year = static_cast<int>(rd.count(at(1), "pub_year"));
        auto dt = parse_doc_type(at(2));
        if (!dt) throw SchemaError(r + 1, "doc_type", "unknown document type '" + at(2) + "'");
        rec.doc_type = *dt;
        rec.n_authors = rd.count(at(3), "n_authors");
        rec.eng = rd.flag(at(4), "eng");
        rec.foreign = rd.flag(at(5), "foreign");
        rec.funding = rd.flag(at(6), "funding");
        rec.open = rd.flag(at(7), "open");
        rec.pages = rd.count(at(8), "pages");
        rec.n_refs = rd.count(at(9), "n_refs");
        rec.impact_factor = rd.real(at(10), "impact_factor");
        rec.sc_codes = split_codes(at(11));
        for (int k = 0; k < 8; ++k) rec.citations[k] = rd.count(at(12 + k), kCitationFields[k]);
        for (int k = 0; k < 7; ++k) rec.readerships[k] = rd.count(at(20 + k), kReadFields[k]);
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<PublicationRecord> read_jsonl_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    const auto& want = corpus_csv_columns();
    std::vector<PublicationRecord> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(row, "*", std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw SchemaError(row, "*", "expected a JSON object");
        for (const auto& name : want)
            if (!j.contains(name)) throw SchemaError(row, name, "missing field");
        for (const auto& [key, _] : j.items())
            if (std::find(want.begin(), want.end(), key) == want.end()) throw SchemaError(row, key, "unexpected field");

        auto integer = [&](const char* field) -> std::int64_t {
            const auto& v = j.at(field);
            if (!v.is_number_integer()) throw SchemaError(row, field, "expected an integer");
            return v.get<std::int64_t>();
        };
        auto flag = [&](const char* field) -> bool {
            const auto& v = j.at(field);
            if (v.is_boolean()) return v.get<bool>();
            if (v.is_number_integer() && (v.get<std::int64_t>() == 0 || v.get<std::int64_t>() == 1))
                return v.get<std::int64_t>() == 1;
            throw SchemaError(row, field, "expected a boolean or 0/1");
        };

        PublicationRecord rec;
        if (!j.at("id").is_string()) throw SchemaError(row, "id", "expected a string");
        rec.id = j.at("id").get<std::string>();
        rec.pub_year = static_cast<int>(integer("pub_year"));
        if (!j.at("doc_type").is_string()) throw SchemaError(row, "doc_type", "expected a string");
        auto dt = parse_doc_type(j.at("doc_type").get<std::string>());
        if (!dt) throw SchemaError(row, "doc_type", "unknown document type");
        rec.doc_type = *dt;
        rec.n_authors = integer("n_authors");
        rec.eng = flag("eng");
        rec.foreign = flag("foreign");
        rec.funding = flag("funding");
        rec.open = flag("open");
        rec.pages = integer("pages");
        rec.n_refs = integer("n_refs");
        if (!j.at("impact_factor").is_number()) throw SchemaError(row, "impact_factor", "expected a number");
        rec.impact_factor = j.at("impact_factor").get<double>();
        const auto& codes = j.at("sc_codes");
        if (!codes.is_array()) throw SchemaError(row, "sc_codes", "expected an array of strings");
        for (const auto& c : codes) {
            if (!c.is_string()) throw SchemaError(row, "sc_codes", "expected an array of strings");
            rec.sc_codes.push_back(c.get<std::string>());
        }
        for (int k = 0; k < 8; ++k) rec.citations[k] = integer(kCitationFields[k]);
        for (int k = 0; k < 7; ++k) rec.readerships[k] = integer(kReadFields[k]);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace detail

/// Reads and validates a corpus file. Errors: IoError, SchemaError, DuplicateIdError, ValidationError.
inline Corpus load_corpus(const std::string& path, CorpusFormat format) {
    auto records = format == CorpusFormat::csv ? detail::read_csv_records(path) : detail::read_jsonl_records(path);
    return Corpus(std::move(records));
}

inline Corpus load_corpus(const std::string& path) { return load_corpus(path, format_from_path(path)); }

inline std::string corpus_to_csv(const Corpus& corpus) {
    std::string out = csv_join(corpus_csv_columns()) + "\n";
    for (const auto& r : corpus.records()) {
        std::string codes;
        for (std::size_t i = 0; i < r.sc_codes.size(); ++i) codes += (i ? ";" : "") + r.sc_codes[i];
        std::vector<std::string> f{r.id,
                                   std::to_string(r.pub_year),
                                   std::string(to_string(r.doc_type)),
                                   std::to_string(r.n_authors),
                                   r.eng ? "1" : "0",
                                   r.foreign ? "1" : "0",
                                   r.funding ? "1" : "0",
                                   r.open ? "1" : "0",
                                   std::to_string(r.pages),
                                   std::to_string(r.n_refs),
                                   exact_real(r.impact_factor),
                                   codes};
        for (auto c : r.citations) f.push_back(std::to_string(c));
        for (auto c : r.readerships) f.push_back(std::to_string(c));
        out += csv_join(f) + "\n";
    }
    return out;
}

inline std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& r : corpus.records()) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["pub_year"] = r.pub_year;
        j["doc_type"] = std::string(to_string(r.doc_type));
        j["n_authors"] = r.n_authors;
        j["eng"] = r.eng ? 1 : 0;
        j["foreign"] = r.foreign ? 1 : 0;
        j["funding"] = r.funding ? 1 : 0;
        j["open"] = r.open ? 1 : 0;
        j["pages"] = r.pages;
        j["n_refs"] = r.n_refs;
        j["impact_factor"] = r.impact_factor;
        j["sc_codes"] = r.sc_codes;
        for (int k = 0; k < 8; ++k) j[detail::kCitationFields[k]] = r.citations[k];
        for (int k = 0; k < 7; ++k) j[detail::kReadFields[k]] = r.readerships[k];
        out += j.dump() + "\n";
    }
    return out;
}

inline void write_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format) {
    write_text(path, format == CorpusFormat::csv ? corpus_to_csv(corpus) : corpus_to_jsonl(corpus));
}

struct CorpusManifest {
    std::size_t record_count = 0;
    std::size_t sc_count = 0;
    std::map<std::string, std::size_t> per_sc;  // full multi-assignment counts
    int year_min = 0;
    int year_max = 0;
    std::size_t assignment_count = 0;  // sum of per_sc
};

inline CorpusManifest corpus_manifest(const Corpus& corpus) {
    if (corpus.empty()) throw EmptyCorpusError();
    CorpusManifest m;
    m.record_count = corpus.size();
    m.sc_count = corpus.sc_universe().size();
    m.year_min = corpus[0].pub_year;
    m.year_max = corpus[0].pub_year;
    for (const auto& r : corpus.records()) {
        m.year_min = std::min(m.year_min, r.pub_year);
        m.year_max = std::max(m.year_max, r.pub_year);
        for (const auto& sc : r.sc_codes) ++m.per_sc[sc];
        m.assignment_count += r.sc_codes.size();
    }
    return m;
}

}  // namespace citeforecast
