#pragma once

// Command implementations behind the citeforecast executable. Each command reads its inputs,
// writes CSV/JSON files plus manifest.json into the output directory, and returns an exit status:
// 0 success, 1 validation/configuration failure, 2 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "citeforecast/corpus.hpp"
#include "citeforecast/design.hpp"
#include "citeforecast/diagnostics.hpp"
#include "citeforecast/errors.hpp"
#include "citeforecast/ols.hpp"
#include "citeforecast/stats.hpp"
#include "citeforecast/suite.hpp"
#include "citeforecast/synth.hpp"
#include "citeforecast/text.hpp"

namespace citeforecast::app {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 42;

enum class Command { ingest, describe, fit, suite, bootstrap, diagnose, predict, synth };

inline const std::vector<std::pair<std::string, Command>>& command_names() {
    static const std::vector<std::pair<std::string, Command>> names{
        {"ingest", Command::ingest},       {"describe", Command::describe}, {"fit", Command::fit},
        {"suite", Command::suite},         {"bootstrap", Command::bootstrap}, {"diagnose", Command::diagnose},
        {"predict", Command::predict},     {"synth", Command::synth}};
    return names;
}

inline std::string to_string(Command c) {
    for (const auto& [name, cmd] : command_names())
        if (cmd == c) return name;
    return "?";
}

inline Command parse_command(std::string_view s) {
    for (const auto& [name, cmd] : command_names())
        if (name == s) return cmd;
    throw ConfigError("unknown command '" + std::string(s) + "'");
}

inline AnovaVariant parse_anova_variant(std::string_view s) {
    if (s == "additional_columns") return AnovaVariant::additional_columns;
    if (s == "classical") return AnovaVariant::classical;
    throw ConfigError("unknown anova variant '" + std::string(s) + "' (additional_columns|classical)");
}

inline CorrelationScale parse_correlation_scale(std::string_view s) {
    if (s == "raw") return CorrelationScale::raw;
    if (s == "log") return CorrelationScale::log;
    throw ConfigError("unknown correlation scale '" + std::string(s) + "' (raw|log)");
}

struct RunConfig {
    std::string corpus;            // input corpus (csv or jsonl by extension)
    std::string baselines;         // optional external baseline table
    std::string out;               // output directory
    std::optional<std::uint64_t> seed;
    std::optional<std::string> family;
    std::optional<int> window;
    bool intercept = true;                                         // D6
    CorrelationScale correlation_scale = CorrelationScale::raw;    // D4
    StarThresholds stars;                                          // D12
    AnovaVariant anova_variant = AnovaVariant::additional_columns;  // D15
    std::string baseline_sc;       // empty: first SC code
    unsigned workers = 0;          // 0: hardware concurrency
    std::size_t resamples = 500;
    std::optional<std::size_t> bins;
    std::string fit_file;          // predict: saved fit JSON
    std::string features;          // predict: feature CSV
    std::string generator_config;  // synth: GeneratorConfig JSON
    std::optional<std::size_t> n_records;
    std::optional<std::size_t> n_scs;
    std::string corpus_format = "csv";  // synth output format
};

inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["corpus"] = c.corpus;
    j["baselines"] = c.baselines;
    j["out"] = c.out;
    j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
    j["family"] = c.family ? nlohmann::ordered_json(*c.family) : nlohmann::ordered_json(nullptr);
    j["window"] = c.window ? nlohmann::ordered_json(*c.window) : nlohmann::ordered_json(nullptr);
    j["intercept"] = c.intercept;
    j["correlation_scale"] = std::string(to_string(c.correlation_scale));
    j["stars"] = {c.stars.three, c.stars.two, c.stars.one};
    j["anova_variant"] = std::string(to_string(c.anova_variant));
    j["baseline_sc"] = c.baseline_sc;
    j["workers"] = c.workers;
    j["resamples"] = c.resamples;
    j["bins"] = c.bins ? nlohmann::ordered_json(*c.bins) : nlohmann::ordered_json(nullptr);
    j["fit_file"] = c.fit_file;
    j["features"] = c.features;
    j["generator_config"] = c.generator_config;
    j["n_records"] = c.n_records ? nlohmann::ordered_json(*c.n_records) : nlohmann::ordered_json(nullptr);
    j["n_scs"] = c.n_scs ? nlohmann::ordered_json(*c.n_scs) : nlohmann::ordered_json(nullptr);
    j["corpus_format"] = c.corpus_format;
    return j;
}

/// Keys as written by to_json; absent or null keys keep their defaults.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        detail::reject_unknown(j,
                               {"corpus", "baselines", "out", "seed", "family", "window", "intercept", "correlation_scale",
                                "stars", "anova_variant", "baseline_sc", "workers", "resamples", "bins", "fit_file",
                                "features", "generator_config", "n_records", "n_scs", "corpus_format"},
                               "run config");
        auto has = [&](const char* k) { return j.contains(k) && !j.at(k).is_null(); };
        if (has("corpus")) c.corpus = j.at("corpus").get<std::string>();
        if (has("baselines")) c.baselines = j.at("baselines").get<std::string>();
        if (has("out")) c.out = j.at("out").get<std::string>();
        if (has("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (has("family")) c.family = j.at("family").get<std::string>();
        if (has("window")) c.window = j.at("window").get<int>();
        if (has("intercept")) c.intercept = j.at("intercept").get<bool>();
        if (has("correlation_scale")) c.correlation_scale = parse_correlation_scale(j.at("correlation_scale").get<std::string>());
        if (has("stars")) {
            auto s = j.at("stars").get<std::vector<double>>();
            if (s.size() != 3) throw ConfigError("stars must list three thresholds");
            c.stars = {s[0], s[1], s[2]};
        }
        if (has("anova_variant")) c.anova_variant = parse_anova_variant(j.at("anova_variant").get<std::string>());
        if (has("baseline_sc")) c.baseline_sc = j.at("baseline_sc").get<std::string>();
        if (has("workers")) c.workers = j.at("workers").get<unsigned>();
        if (has("resamples")) c.resamples = j.at("resamples").get<std::size_t>();
        if (has("bins")) c.bins = j.at("bins").get<std::size_t>();
        if (has("fit_file")) c.fit_file = j.at("fit_file").get<std::string>();
        if (has("features")) c.features = j.at("features").get<std::string>();
        if (has("generator_config")) c.generator_config = j.at("generator_config").get<std::string>();
        if (has("n_records")) c.n_records = j.at("n_records").get<std::size_t>();
        if (has("n_scs")) c.n_scs = j.at("n_scs").get<std::size_t>();
        if (has("corpus_format")) c.corpus_format = j.at("corpus_format").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed run config: ") + e.what());
    }
    return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Every decision toggle and fixed convention, echoed into each manifest.
inline nlohmann::ordered_json decision_settings(const RunConfig& c) {
    using J = nlohmann::ordered_json;
    J d;
    d["D1_multi_sc_denominator"] = "mean_of_member_sc_baselines";
    d["D2_std_dev"] = "sample_n_minus_1";
    d["D3_single_record_std_dev"] = "zero_with_flag";
    d["D4_correlation"] = J{{"kind", "pearson"}, {"scale", std::string(to_string(c.correlation_scale))}};
    d["D5_baselines"] = c.baselines.empty() ? "computed_from_corpus" : "external_file";
    d["D6_intercept"] = c.intercept;
    d["D7_sc_dummies"] = "multi_hot";
    d["D8_column_order"] = "table_order_then_sorted_sc_codes";
    d["D9_empty_dummies"] = "dropped_and_reported_aliased";
    d["D10_fit_statistics"] = "textbook_adjusted_r2_and_overall_f";
    d["D11_back_transform"] = "10^y-1_floored_at_0";
    d["D12_stars"] = J{{"***", c.stars.three}, {"**", c.stars.two}, {"*", c.stars.one}};
    d["D13_aliasing"] = J{{"relative_tolerance", 1e-10}, {"dropped", "last_dependent_column"}};
    d["D14_quartiles"] = "type7";
    d["D15_anova_variant"] = std::string(to_string(c.anova_variant));
    d["D16_comparisons"] = "full_vs_restricted_same_window";
    d["D17_kde"] = J{{"kernel", "gaussian"}, {"bandwidth", "silverman"}, {"points", kDensityPoints}};
    d["D18_histogram_bins"] = c.bins ? J(*c.bins) : J("ceil_sqrt_n_capped_100");
    d["D19_qq_positions"] = "(i-0.5)/n_standardized";
    d["D20_bootstrap"] = J{{"unit", "case"}, {"resamples", c.resamples}, {"retry", "next_sub_seed"}};
    return d;
}

namespace detail {

class Output {
public:
    explicit Output(const std::string& dir) : dir_(dir) {
        if (dir.empty()) throw ConfigError("an output directory is required (--out)");
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_)) throw IoError("cannot create output directory " + dir);
    }
    void write(const std::string& rel, const std::string& text) {
        auto path = dir_ / rel;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        write_text(path.string(), text);
        files_.push_back(rel);
    }
    std::string path(const std::string& rel) const { return (dir_ / rel).string(); }
    const std::vector<std::string>& files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

struct Loaded {
    Corpus corpus;
    BaselineTable baselines;
    std::vector<NormalizedMeasures> measures;
};

inline Loaded load_inputs(const RunConfig& c) {
    if (c.corpus.empty()) throw ConfigError("an input corpus is required (--corpus)");
    Corpus corpus = load_corpus(c.corpus);
    if (corpus.empty()) throw EmptyCorpusError();
    BaselineTable baselines = c.baselines.empty() ? compute_baselines(corpus) : read_baselines(c.baselines);
    auto measures = normalize_corpus(corpus, baselines);
    return {std::move(corpus), std::move(baselines), std::move(measures)};
}

inline ModelSpec selected_spec(const RunConfig& c, Family default_family, std::optional<int> default_window) {
    ModelSpec s;
    if (c.family) {
        s.family = parse_family(*c.family);
    } else {
        s.family = default_family;
    }
    if (c.window) {
        s.window = *c.window;
    } else if (default_window) {
        s.window = *default_window;
    } else {
        throw ConfigError("--window is required");
    }
    s.baseline_sc = c.baseline_sc;
    s.include_intercept = c.intercept;
    validate_spec(s);
    return s;
}

inline std::string model_label(const ModelSpec& s) {
    return std::string(to_string(s.family)) + "_t" + std::to_string(s.window);
}

// Re-raises a fitting error with the model named, keeping its exit class.
template <typename F>
auto with_model(const ModelSpec& s, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        std::string msg = "model " + std::string(to_string(s.family)) + " t=" + std::to_string(s.window) + ": " + e.what();
        if (e.kind() == ErrorKind::numerical) throw DomainError(msg);
        throw ConfigError(msg);
    }
}

inline void write_manifest(Output& out, Command cmd, const RunConfig& c, std::optional<std::uint64_t> seed,
                           std::string_view provenance, nlohmann::ordered_json summary) {
    nlohmann::ordered_json m;
    m["tool"] = "citeforecast";
    m["version"] = std::string(kToolVersion);
    m["command"] = to_string(cmd);
    m["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    m["config"] = to_json(c);
    m["decisions"] = decision_settings(c);
    m["baseline_provenance"] = std::string(provenance);
    m["summary"] = std::move(summary);
    auto files = out.files();
    files.push_back("manifest.json");
    m["outputs"] = files;
    out.write("manifest.json", m.dump(2) + "\n");
}

inline std::string residuals_to_csv(const FitResult& f, const std::vector<std::string>& ids) {
    std::string out = "id,residual\n";
    for (Eigen::Index i = 0; i < f.residuals.size(); ++i)
        out += csv_join({ids[static_cast<std::size_t>(i)], fixed6(f.residuals[i])}) + "\n";
    return out;
}

// --- commands ------------------------------------------------------------------------------------

inline int cmd_ingest(const RunConfig& c, std::ostream& log) {
    if (c.corpus.empty()) throw ConfigError("an input corpus is required (--corpus)");
    Corpus corpus = load_corpus(c.corpus);
    auto man = corpus_manifest(corpus);
    Output out(c.out);
    std::string counts = "sc,count\n";
    std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
    for (const auto& [sc, n] : man.per_sc) {
        counts += csv_join({sc, std::to_string(n)}) + "\n";
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    out.write("sc_counts.csv", counts);
    nlohmann::ordered_json s;
    s["record_count"] = man.record_count;
    s["sc_count"] = man.sc_count;
    s["assignment_count"] = man.assignment_count;
    s["year_min"] = man.year_min;
    s["year_max"] = man.year_max;
    s["per_sc_min"] = lo;
    s["per_sc_max"] = hi;
    s["per_sc_mean"] = static_cast<double>(man.assignment_count) / static_cast<double>(man.sc_count);
    write_manifest(out, Command::ingest, c, c.seed, "not_applicable", s);
    log << "ingest: " << man.record_count << " records in " << man.sc_count << " subject categories\n";
    return 0;
}

inline int cmd_describe(const RunConfig& c, std::ostream& log) {
    auto in = load_inputs(c);
    Output out(c.out);
    out.write("descriptive.csv", descriptive_to_csv(descriptive_table(in.corpus, in.measures)));
    auto corr = correlation_matrices(in.corpus, in.measures, c.correlation_scale);
    out.write("corr_impact.csv", correlation_to_csv(corr.impact));
    out.write("corr_readership.csv", correlation_to_csv(corr.readership));
    out.write("corr_features.csv", correlation_to_csv(corr.features));
    auto man = corpus_manifest(in.corpus);
    double h = hhi(in.corpus);
    out.write("concentration.csv", "hhi,sc_count,record_count,assignment_count\n" +
                                       csv_join({fixed6(h), std::to_string(man.sc_count), std::to_string(man.record_count),
                                                 std::to_string(man.assignment_count)}) +
                                       "\n");
    nlohmann::ordered_json s;
    s["record_count"] = man.record_count;
    s["hhi"] = h;
    std::vector<std::string> degenerate;
    for (const auto* m : {&corr.impact, &corr.readership, &corr.features})
        degenerate.insert(degenerate.end(), m->degenerate.begin(), m->degenerate.end());
    s["degenerate_columns"] = degenerate;
    write_manifest(out, Command::describe, c, c.seed, to_string(in.baselines.provenance), s);
    log << "describe: " << man.record_count << " records, HHI " << fixed6(h) << "\n";
    return 0;
}

inline int cmd_fit(const RunConfig& c, std::ostream& log) {
    if (!c.family) throw ConfigError("--family is required");
    auto spec = selected_spec(c, Family::full, std::nullopt);
    auto in = load_inputs(c);
    DesignMatrix m = with_model(spec, [&] { return build_matrix(in.corpus, in.measures, spec); });
    FitResult f = with_model(spec, [&] { return fit(m); });
    Output out(c.out);
    out.write("fit.json", fit_to_json(f, c.stars).dump(2) + "\n");
    out.write("fit.csv", fit_to_csv(f, c.stars));
    out.write("residuals.csv", residuals_to_csv(f, m.row_ids()));
    nlohmann::ordered_json s;
    s["model"] = model_label(*f.spec);
    s["baseline_sc"] = f.spec->baseline_sc;
    s["adjusted_r2"] = f.adjusted_r2;
    s["dof"] = f.dof;
    s["aliased"] = f.aliased;
    write_manifest(out, Command::fit, c, c.seed, to_string(in.baselines.provenance), s);
    log << "fit " << model_label(*f.spec) << ": adjusted R^2 " << fixed6(f.adjusted_r2) << ", dof " << f.dof << "\n";
    return 0;
}

inline int cmd_suite(const RunConfig& c, std::ostream& log) {
    auto in = load_inputs(c);
    SuiteOptions opt;
    opt.baseline_sc = c.baseline_sc;
    opt.include_intercept = c.intercept;
    opt.variant = c.anova_variant;
    opt.workers = c.workers;
    if (c.family) opt.families = {parse_family(*c.family)};
    SuiteResult r = run_suite(in.corpus, in.measures, opt);
    Output out(c.out);
    for (const auto& [key, f] : r.fits) {
        std::string stem = "fits/" + model_label(*f.spec);
        out.write(stem + ".json", fit_to_json(f, c.stars).dump(2) + "\n");
        out.write(stem + ".csv", fit_to_csv(f, c.stars));
    }
    out.write("r2_curve.csv", r2_curve_to_csv(r));
    out.write("anova.csv", anova_to_csv(r.comparisons));
    AnovaVariant alternate =
        c.anova_variant == AnovaVariant::additional_columns ? AnovaVariant::classical : AnovaVariant::additional_columns;
    out.write("anova_" + std::string(to_string(alternate)) + ".csv", anova_to_csv(r.alternate_comparisons));
    out.write("sc_dummies.csv", sc_dummies_to_csv(r));
    nlohmann::ordered_json s;
    s["fits"] = r.fits.size();
    s["comparisons"] = r.comparisons.size();
    s["baseline_sc"] = r.baseline_sc;
    s["anova_primary"] = std::string(to_string(r.variant));
    s["anova_alternate_file"] = "anova_" + std::string(to_string(alternate)) + ".csv";
    s["quartile_convention"] = "type7";
    write_manifest(out, Command::suite, c, c.seed, to_string(in.baselines.provenance), s);
    log << "suite: " << r.fits.size() << " fits, " << r.comparisons.size() << " comparisons\n";
    return 0;
}

inline int cmd_bootstrap(const RunConfig& c, std::ostream& log) {
    auto spec = selected_spec(c, Family::full, 0);
    auto in = load_inputs(c);
    DesignMatrix m = with_model(spec, [&] { return build_matrix(in.corpus, in.measures, spec); });
    BootstrapOptions o;
    o.resamples = c.resamples;
    o.seed = c.seed.value_or(kDefaultSeed);
    o.workers = c.workers;
    BootstrapReport rep = with_model(spec, [&] { return bootstrap(m, o); });
    Output out(c.out);
    out.write("bootstrap.csv", bootstrap_to_csv(rep));
    nlohmann::ordered_json s;
    s["model"] = model_label(spec);
    s["resamples"] = rep.resamples;
    s["retries"] = rep.retries;
    write_manifest(out, Command::bootstrap, c, o.seed, to_string(in.baselines.provenance), s);
    log << "bootstrap " << model_label(spec) << ": " << rep.resamples << " resamples, " << rep.retries << " retries\n";
    return 0;
}

inline int cmd_diagnose(const RunConfig& c, std::ostream& log) {
    auto spec = selected_spec(c, Family::full, 0);
    auto in = load_inputs(c);
    DesignMatrix m = with_model(spec, [&] { return build_matrix(in.corpus, in.measures, spec); });
    FitResult f = with_model(spec, [&] { return fit(m); });
    std::span<const double> res(f.residuals.data(), static_cast<std::size_t>(f.residuals.size()));
    auto hist = with_model(spec, [&] { return residual_histogram(res, c.bins); });
    auto qq = with_model(spec, [&] { return qq_points(res); });
    Output out(c.out);
    out.write("residual_hist.csv", histogram_to_csv(hist));
    out.write("qq.csv", qq_to_csv(qq));
    nlohmann::ordered_json s;
    s["model"] = model_label(spec);
    s["residuals"] = res.size();
    s["bins"] = hist.bins.size();
    s["bandwidth"] = hist.bandwidth;
    write_manifest(out, Command::diagnose, c, c.seed, to_string(in.baselines.provenance), s);
    log << "diagnose " << model_label(spec) << ": " << res.size() << " residuals\n";
    return 0;
}

/// Feature file: CSV whose header names design columns (log-scale values as in the fit), plus an
/// optional `id` column. Absent indicator columns count as 0.
inline int cmd_predict(const RunConfig& c, std::ostream& log) {
    if (c.fit_file.empty()) throw ConfigError("a saved fit is required (--fit)");
    if (c.features.empty()) throw ConfigError("a feature file is required (--features)");
    FitResult f = fit_from_json(read_json_file(c.fit_file));
    CsvTable table = read_csv(c.features);
    auto id_col = table.column("id");
    std::string csv = "id,log_scale,back_transformed\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::map<std::string, double> features;
        for (std::size_t k = 0; k < table.header.size(); ++k) {
            if (id_col && k == *id_col) continue;
            auto v = parse_real(table.rows[r][k]);
            if (!v || !std::isfinite(*v)) throw SchemaError(r + 1, table.header[k], "expected a finite number");
            features[table.header[k]] = *v;
        }
        Prediction p = predict(f, features);
        std::string id = id_col ? table.rows[r][*id_col] : std::to_string(r + 1);
        csv += csv_join({id, fixed6(p.log_scale), fixed6(p.back_transformed)}) + "\n";
    }
    Output out(c.out);
    out.write("predictions.csv", csv);
    nlohmann::ordered_json s;
    s["rows"] = table.rows.size();
    s["model"] = f.spec ? nlohmann::ordered_json(model_label(*f.spec)) : nlohmann::ordered_json(nullptr);
    s["primary_scale"] = "log";
    write_manifest(out, Command::predict, c, c.seed, "not_applicable", s);
    log << "predict: " << table.rows.size() << " rows scored\n";
    return 0;
}

inline int cmd_synth(const RunConfig& c, std::ostream& log) {
    GeneratorConfig g;
    if (!c.generator_config.empty()) g = generator_config_from_json(read_json_file(c.generator_config));
    if (c.seed) g.seed = *c.seed;
    if (c.n_records) g.n_records = *c.n_records;
    if (c.n_scs) g.n_scs = *c.n_scs;
    g.workers = c.workers;
    validate_config(g);
    if (c.corpus_format != "csv" && c.corpus_format != "jsonl")
        throw ConfigError("corpus format must be csv or jsonl");

    SynthOutput result = generate(g);
    CalibrationReport rep = calibration_report(result.corpus, g);
    Output out(c.out);
    std::string corpus_file = "corpus." + c.corpus_format;
    out.write(corpus_file, c.corpus_format == "csv" ? corpus_to_csv(result.corpus) : corpus_to_jsonl(result.corpus));
    out.write("calibration_report.csv", calibration_to_csv(rep));
    out.write("generator_config.json", to_json(g).dump(2) + "\n");
    if (result.baselines) out.write("baselines.csv", baselines_to_csv(*result.baselines));
    nlohmann::ordered_json s;
    s["records"] = result.corpus.size();
    s["subject_categories"] = result.corpus.sc_universe().size();
    s["corpus_file"] = corpus_file;
    s["calibration_passed"] = rep.passed_count();
    s["calibration_targets"] = rep.rows.size();
    s["calibration_pass_fraction"] = rep.pass_fraction();
    s["min_pass_fraction"] = rep.min_pass_fraction;
    s["ground_truth"] = g.ground_truth.has_value();
    s["ground_truth_clamped_rows"] = result.clamped_rows;
    write_manifest(out, Command::synth, c, g.seed,
                   result.baselines ? to_string(result.baselines->provenance) : "not_applicable", s);
    log << "synth: " << result.corpus.size() << " records, calibration " << rep.passed_count() << "/" << rep.rows.size()
        << " targets met\n";
    if (!rep.passed()) {
        std::cerr << "error: calibration pass fraction " << fixed6(rep.pass_fraction()) << " is below "
                  << fixed6(rep.min_pass_fraction) << "\n";
        for (const auto& row : rep.rows)
            if (!row.pass)
                std::cerr << "  " << row.variable << " " << row.statistic << ": target " << fixed6(row.target) << ", achieved "
                          << fixed6(row.achieved) << "\n";
        return 1;
    }
    return 0;
}

}  // namespace detail

/// Runs one command; errors are reported on `err` and mapped to the exit status.
inline int run(Command cmd, const RunConfig& config, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    try {
        switch (cmd) {
            case Command::ingest: return detail::cmd_ingest(config, log);
            case Command::describe: return detail::cmd_describe(config, log);
            case Command::fit: return detail::cmd_fit(config, log);
            case Command::suite: return detail::cmd_suite(config, log);
            case Command::bootstrap: return detail::cmd_bootstrap(config, log);
            case Command::diagnose: return detail::cmd_diagnose(config, log);
            case Command::predict: return detail::cmd_predict(config, log);
            case Command::synth: return detail::cmd_synth(config, log);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::numerical ? 2 : 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace citeforecast::app
