// citeforecast command-line entry point.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citeforecast/app.hpp"

namespace cf = citeforecast;

namespace {

std::vector<double> parse_stars(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto v = cf::parse_real(part);
        if (!v) throw cf::ConfigError("--stars expects three comma-separated numbers");
        out.push_back(*v);
    }
    if (out.size() != 3 || !(out[0] <= out[1] && out[1] <= out[2]))
        throw cf::ConfigError("--stars expects three increasing thresholds, e.g. 0.01,0.05,0.1");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-term citation impact prediction: normalization, nested OLS families, ANOVA, bootstrap, synthetic corpora"};
    app.set_version_flag("--version", std::string(cf::app::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file, corpus, baselines, out, family, fit_file, features, generator_config, baseline_sc;
    std::string correlation_scale, anova_variant, stars, format;
    std::optional<std::uint64_t> seed;
    std::optional<int> window;
    std::optional<unsigned> workers;
    std::optional<std::size_t> resamples, bins, n_records, n_scs;
    bool no_intercept = false;

    app.add_option("--config", config_file, "JSON run config; flags override its values");
    auto* o_corpus = app.add_option("--corpus", corpus, "Input corpus (.csv or .jsonl)");
    auto* o_baselines = app.add_option("--baselines", baselines, "External baseline table CSV");
    auto* o_out = app.add_option("--out", out, "Output directory");
    app.add_option("--seed", seed, "Random seed (bootstrap, synth)");
    auto* o_family = app.add_option("--family", family, "full | reduced | completely_reduced");
    app.add_option("--window", window, "Predictor window t in [0, 6]");
    auto* o_no_int = app.add_flag("--no-intercept", no_intercept, "Fit without an intercept");
    auto* o_scale = app.add_option("--correlation-scale", correlation_scale, "raw | log");
    auto* o_stars = app.add_option("--stars", stars, "Significance thresholds for ***,**,* (default 0.01,0.05,0.1)");
    auto* o_variant = app.add_option("--anova-variant", anova_variant, "additional_columns | classical");
    auto* o_base = app.add_option("--baseline-sc", baseline_sc, "Reference subject category (default: first code)");
    app.add_option("--workers", workers, "Worker threads (0 = all cores)");
    app.add_option("--resamples", resamples, "Bootstrap resamples");
    app.add_option("--bins", bins, "Histogram bins (default ceil(sqrt(n)), at most 100)");
    auto* o_fit = app.add_option("--fit", fit_file, "Saved fit JSON (predict)");
    auto* o_features = app.add_option("--features", features, "Feature CSV (predict)");
    auto* o_gen = app.add_option("--generator-config", generator_config, "Generator config JSON (synth)");
    app.add_option("--n-records", n_records, "Synthetic record count");
    app.add_option("--n-scs", n_scs, "Synthetic subject-category count");
    auto* o_format = app.add_option("--format", format, "Synthetic corpus format: csv | jsonl");

    app.add_subcommand("ingest", "Validate a corpus and write per-SC counts");
    app.add_subcommand("describe", "Descriptive statistics, HHI and correlation matrices");
    app.add_subcommand("fit", "Fit one model (--family, --window)");
    app.add_subcommand("suite", "All 21 fits, adjusted R^2 curves, 14 ANOVA comparisons, SC dummy summaries");
    app.add_subcommand("bootstrap", "Case bootstrap of one model's coefficients");
    app.add_subcommand("diagnose", "Residual histogram, kernel density and Q-Q points");
    app.add_subcommand("predict", "Score a feature file with a saved fit");
    app.add_subcommand("synth", "Generate a synthetic corpus and its calibration report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cf::app::RunConfig cfg;
        if (!config_file.empty()) cfg = cf::app::run_config_from_json(cf::app::read_json_file(config_file));
        if (o_corpus->count()) cfg.corpus = corpus;
        if (o_baselines->count()) cfg.baselines = baselines;
        if (o_out->count()) cfg.out = out;
        if (seed) cfg.seed = seed;
        if (o_family->count()) cfg.family = family;
        if (window) cfg.window = window;
        if (o_no_int->count()) cfg.intercept = false;
        if (o_scale->count()) cfg.correlation_scale = cf::app::parse_correlation_scale(correlation_scale);
        if (o_stars->count()) {
            auto s = parse_stars(stars);
            cfg.stars = {s[0], s[1], s[2]};
        }
        if (o_variant->count()) cfg.anova_variant = cf::app::parse_anova_variant(anova_variant);
        if (o_base->count()) cfg.baseline_sc = baseline_sc;
        if (workers) cfg.workers = *workers;
        if (resamples) cfg.resamples = *resamples;
        if (bins) cfg.bins = bins;
        if (o_fit->count()) cfg.fit_file = fit_file;
        if (o_features->count()) cfg.features = features;
        if (o_gen->count()) cfg.generator_config = generator_config;
        if (n_records) cfg.n_records = n_records;
        if (n_scs) cfg.n_scs = n_scs;
        if (o_format->count()) cfg.corpus_format = format;

        auto command = cf::app::parse_command(app.get_subcommands().front()->get_name());
        return cf::app::run(command, cfg);
    } catch (const cf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == cf::ErrorKind::numerical ? 2 : 1;
    }
}
