#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citeforecast/text.hpp"
#include "support.hpp"

using namespace citeforecast;
using namespace testing_support;

namespace {

struct Outcome {
    int status = -1;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli(const std::string& args, const std::string& scratch) {
    std::string err_file = scratch + "/stderr.txt";
    std::string cmd = std::string(CITEFORECAST_CLI) + " " + args + " > " + scratch + "/stdout.txt 2> " + err_file;
    int raw = std::system(cmd.c_str());
    Outcome o;
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    o.err = slurp(err_file);
    return o;
}

std::size_t data_rows(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    std::getline(in, line);
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

nlohmann::json manifest(const std::string& dir) { return nlohmann::json::parse(slurp(dir + "/manifest.json")); }

const std::string kFixture = data_path("fixture10.csv");

// Small corpora cannot meet the concentration and author-count targets, so the gate is lowered.
std::string small_synth_args(const std::string& dir, nlohmann::json gen) {
    gen["min_pass_fraction"] = 0.0;
    write_text(dir + "/gen.json", gen.dump());
    return "synth --generator-config " + dir + "/gen.json";
}

}  // namespace

TEST(Cli, DescribeMatchesGoldenFilesByteForByte) {
    auto dir = scratch_dir("cli_describe");
    auto o = cli("describe --corpus " + kFixture + " --out " + dir + "/out", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    for (const char* name : {"descriptive.csv", "corr_impact.csv", "corr_readership.csv", "corr_features.csv", "concentration.csv"}) {
        std::string golden = slurp(data_path(std::string("golden_describe/") + name));
        ASSERT_FALSE(golden.empty()) << name;
        EXPECT_EQ(slurp(dir + "/out/" + name), golden) << name;
    }
}

TEST(Cli, CompletelyReducedFitAtSix) {
    auto dir = scratch_dir("cli_fit");
    auto o = cli("fit --corpus " + kFixture + " --family completely_reduced --window 6 --out " + dir + "/out", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    auto fit = nlohmann::json::parse(slurp(dir + "/out/fit.json"));
    std::vector<std::string> names;
    for (const auto& c : fit["coefficients"]) names.push_back(c["variable"].get<std::string>());
    EXPECT_EQ(names, (std::vector<std::string>{"INTERCEPT", "L_IMPACT_t6", "D_SUBCAT_B", "D_SUBCAT_C"}));
    EXPECT_EQ(fit["spec"]["family"], "completely_reduced");
    EXPECT_EQ(fit["spec"]["window"], 6);
    EXPECT_EQ(data_rows(dir + "/out/residuals.csv"), 10u);
    auto m = manifest(dir + "/out");
    EXPECT_EQ(m["command"], "fit");
    EXPECT_EQ(m["baseline_provenance"], "computed_from_corpus");
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
    auto dir = scratch_dir("cli_repeat");
    for (const char* sub : {"a", "b"}) {
        auto o = cli("fit --corpus " + kFixture + " --family reduced --window 3 --out " + dir + "/" + sub, dir);
        ASSERT_EQ(o.status, 0) << o.err;
    }
    for (const char* f : {"fit.json", "fit.csv", "residuals.csv"}) EXPECT_EQ(slurp(dir + "/a/" + f), slurp(dir + "/b/" + f)) << f;
}

TEST(Cli, ExitCodes) {
    auto dir = scratch_dir("cli_exit");
    EXPECT_EQ(cli("fit --corpus " + kFixture + " --family bogus --window 0 --out " + dir + "/x", dir).status, 1);
    EXPECT_EQ(cli("fit --corpus " + kFixture + " --family full --window 9 --out " + dir + "/x", dir).status, 1);
    EXPECT_EQ(cli("fit --corpus " + kFixture + " --family full --out " + dir + "/x", dir).status, 1);
    EXPECT_EQ(cli("ingest --corpus " + dir + "/missing.csv --out " + dir + "/x", dir).status, 1);
    EXPECT_EQ(cli("frobnicate", dir).status, 1);
    EXPECT_EQ(cli("ingest --corpus " + kFixture + " --out " + dir + "/x --no-such-flag", dir).status, 1);

    // Ten rows cannot carry the full model: a numerical failure naming the model.
    auto o = cli("fit --corpus " + kFixture + " --family full --window 0 --out " + dir + "/x", dir);
    EXPECT_EQ(o.status, 2);
    EXPECT_NE(o.err.find("model full t=0"), std::string::npos) << o.err;

    // Break monotonicity of F03 by making c11 smaller than c6.
    std::string text = slurp(kFixture);
    auto pos = text.find("\nF03,");
    ASSERT_NE(pos, std::string::npos);
    auto line_end = text.find('\n', pos + 1);
    auto fields = csv_split(text.substr(pos + 1, line_end - pos - 1));
    fields[18] = "5";
    fields[19] = "0";
    std::string bad = text.substr(0, pos + 1) + csv_join(fields) + text.substr(line_end);
    write_text(dir + "/bad.csv", bad);
    o = cli("ingest --corpus " + dir + "/bad.csv --out " + dir + "/y", dir);
    EXPECT_EQ(o.status, 1);
    EXPECT_NE(o.err.find("F03"), std::string::npos) << o.err;
    EXPECT_NE(o.err.find("non-monotone citations"), std::string::npos) << o.err;
}

TEST(Cli, IngestAndManifestEchoDecisions) {
    auto dir = scratch_dir("cli_ingest");
    auto o = cli("ingest --corpus " + kFixture + " --out " + dir + "/out", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    EXPECT_EQ(slurp(dir + "/out/sc_counts.csv").substr(0, 9), "sc,count\n");
    auto m = manifest(dir + "/out");
    EXPECT_EQ(m["tool"], "citeforecast");
    EXPECT_TRUE(m.contains("version"));
    EXPECT_TRUE(m.contains("seed"));
    EXPECT_TRUE(m.contains("config"));
    int decisions = 0;
    for (int d = 1; d <= 20; ++d) {
        std::string prefix = "D" + std::to_string(d) + "_";
        for (auto it = m["decisions"].begin(); it != m["decisions"].end(); ++it)
            if (it.key().rfind(prefix, 0) == 0) ++decisions;
    }
    EXPECT_EQ(decisions, 20);
    EXPECT_FALSE(m["outputs"].empty());
}

TEST(Cli, ConfigFileWithFlagOverride) {
    auto dir = scratch_dir("cli_config");
    write_text(dir + "/run.json", nlohmann::json{{"corpus", kFixture}, {"family", "reduced"}, {"window", 2}}.dump());
    auto o = cli("fit --config " + dir + "/run.json --window 4 --out " + dir + "/out", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    auto fit = nlohmann::json::parse(slurp(dir + "/out/fit.json"));
    EXPECT_EQ(fit["spec"]["family"], "reduced");
    EXPECT_EQ(fit["spec"]["window"], 4);
    write_text(dir + "/bad.json", R"({"corpus": 5})");
    EXPECT_EQ(cli("fit --config " + dir + "/bad.json --out " + dir + "/o2", dir).status, 1);
}

TEST(Cli, PredictScoresAFeatureFile) {
    auto dir = scratch_dir("cli_predict");
    ASSERT_EQ(cli("fit --corpus " + kFixture + " --family completely_reduced --window 6 --out " + dir + "/fit", dir).status, 0);
    write_text(dir + "/features.csv", "id,L_IMPACT_t6,D_SUBCAT_B\nx1,0.5,1\nx2,0.1,0\n");
    auto o = cli("predict --fit " + dir + "/fit/fit.json --features " + dir + "/features.csv --out " + dir + "/pred", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    auto fit = nlohmann::json::parse(slurp(dir + "/fit/fit.json"));
    double b0 = fit["coefficients"][0]["estimate"], b1 = fit["coefficients"][1]["estimate"],
           bb = fit["coefficients"][2]["estimate"];
    auto csv = read_csv(dir + "/pred/predictions.csv");
    ASSERT_EQ(csv.header, (std::vector<std::string>{"id", "log_scale", "back_transformed"}));
    ASSERT_EQ(csv.rows.size(), 2u);
    EXPECT_EQ(csv.rows[0][0], "x1");
    EXPECT_EQ(csv.rows[0][1], fixed6(b0 + 0.5 * b1 + bb));
    EXPECT_EQ(csv.rows[1][1], fixed6(b0 + 0.1 * b1));

    write_text(dir + "/short.csv", "id,D_SUBCAT_B\nx1,1\n");
    EXPECT_EQ(cli("predict --fit " + dir + "/fit/fit.json --features " + dir + "/short.csv --out " + dir + "/p2", dir).status, 1);
}

TEST(Cli, SynthThenSuiteThenDiagnose) {
    auto dir = scratch_dir("cli_pipeline");
    auto o = cli(small_synth_args(dir, {{"n_records", 3000}, {"n_scs", 20}, {"seed", 42}}) + " --out " + dir + "/synth", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    EXPECT_TRUE(std::filesystem::exists(dir + "/synth/corpus.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir + "/synth/generator_config.json"));
    EXPECT_GT(data_rows(dir + "/synth/calibration_report.csv"), 10u);
    EXPECT_EQ(manifest(dir + "/synth")["seed"], 42);

    o = cli("suite --corpus " + dir + "/synth/corpus.csv --out " + dir + "/suite --workers 2", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    std::size_t fit_files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir + "/suite/fits"))
        if (e.path().extension() == ".json") ++fit_files;
    EXPECT_EQ(fit_files, 21u);
    EXPECT_EQ(data_rows(dir + "/suite/anova.csv"), 14u);
    EXPECT_EQ(data_rows(dir + "/suite/anova_classical.csv"), 14u);
    EXPECT_EQ(data_rows(dir + "/suite/r2_curve.csv"), 21u);
    EXPECT_EQ(data_rows(dir + "/suite/sc_dummies.csv"), 7u);
    EXPECT_EQ(read_csv(dir + "/suite/anova.csv").header,
              (std::vector<std::string>{"window", "pair", "f_value", "p_value", "rss_full", "rss_restricted", "p_additional", "n"}));

    o = cli("diagnose --corpus " + dir + "/synth/corpus.csv --family full --window 0 --out " + dir + "/diag", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    EXPECT_EQ(data_rows(dir + "/diag/qq.csv"), 3000u);
    EXPECT_EQ(read_csv(dir + "/diag/residual_hist.csv").header,
              (std::vector<std::string>{"bin_left", "bin_width", "count", "density_x", "density_y"}));
}

TEST(Cli, SynthJsonlAndGroundTruthBaselines) {
    auto dir = scratch_dir("cli_synth_gt");
    nlohmann::json gen{{"n_records", 2000},
                       {"n_scs", 10},
                       {"ground_truth",
                        {{"spec", {{"family", "completely_reduced"}, {"window", 1}}},
                         {"beta", {{"INTERCEPT", 0.4}, {"L_IMPACT_t1", 0.5}}},
                         {"noise_sd", 0.0}}}};
    auto o = cli(small_synth_args(dir, gen) + " --format jsonl --out " + dir + "/s", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    ASSERT_TRUE(std::filesystem::exists(dir + "/s/corpus.jsonl"));
    ASSERT_TRUE(std::filesystem::exists(dir + "/s/baselines.csv"));
    o = cli("fit --corpus " + dir + "/s/corpus.jsonl --baselines " + dir + "/s/baselines.csv --family completely_reduced --window 1 --out " + dir + "/f", dir);
    ASSERT_EQ(o.status, 0) << o.err;
    auto fit = nlohmann::json::parse(slurp(dir + "/f/fit.json"));
    EXPECT_NEAR(fit["coefficients"][0]["estimate"].get<double>(), 0.4, 1e-8);
    EXPECT_NEAR(fit["coefficients"][1]["estimate"].get<double>(), 0.5, 1e-8);
    EXPECT_EQ(manifest(dir + "/f")["baseline_provenance"], "external_file");
}

TEST(Cli, MisTargetedSynthExitsOne) {
    auto dir = scratch_dir("cli_synth_bad");
    nlohmann::json gen{{"n_records", 3000},
                       {"n_scs", 20},
                       {"targets", {{"hhi", {{"target", 0.5}, {"tolerance", 0.01}}}, {"impact_lag_correlations", {{"values", {0.1, 0.1, 0.1}}}}}}};
    write_text(dir + "/gen.json", gen.dump());
    auto o = cli("synth --generator-config " + dir + "/gen.json --out " + dir + "/s", dir);
    EXPECT_EQ(o.status, 1) << o.err;
    EXPECT_TRUE(std::filesystem::exists(dir + "/s/calibration_report.csv"));
}

TEST(Cli, BootstrapIsIndependentOfWorkers) {
    auto dir = scratch_dir("cli_bootstrap");
    ASSERT_EQ(cli(small_synth_args(dir, {{"n_records", 600}, {"n_scs", 6}}) + " --out " + dir + "/s", dir).status, 0);
    for (const char* w : {"1", "4"}) {
        auto o = cli("bootstrap --corpus " + dir + "/s/corpus.csv --family reduced --window 1 --resamples 100 --seed 7 --workers " +
                         std::string(w) + " --out " + dir + "/b" + w,
                     dir);
        ASSERT_EQ(o.status, 0) << o.err;
    }
    EXPECT_EQ(slurp(dir + "/b1/bootstrap.csv"), slurp(dir + "/b4/bootstrap.csv"));
    EXPECT_EQ(data_rows(dir + "/b1/bootstrap.csv"), 8u);  // intercept, L_IMPACT_t1, L_IF, five dummies
}
