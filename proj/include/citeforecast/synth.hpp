#pragma once

// Seeded synthetic corpora. Publication attributes are moment-matched to configurable targets and
// citation/readership trajectories come from a latent-quality mixed Poisson process, so the
// qualitative regression findings can be reproduced without proprietary data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "citeforecast/corpus.hpp"
#include "citeforecast/design.hpp"
#include "citeforecast/errors.hpp"
#include "citeforecast/numeric.hpp"
#include "citeforecast/stats.hpp"
#include "citeforecast/text.hpp"

namespace citeforecast {

struct MomentTarget {
    double mean = 0;
    double sd = 0;
    double mean_tolerance = 0.10;  // relative
    double sd_tolerance = 0.30;    // relative
};

struct ShareTarget {
    double share = 0;
    double tolerance = 0.02;  // absolute
};

struct ValueTarget {
    double target = 0;
    double tolerance = 0;  // absolute
};

struct CalibrationTargets {
    MomentTarget auth{13.849, 127.614, 0.10, 0.35};
    MomentTarget pages{9.866, 8.176, 0.10, 0.25};
    MomentTarget impact_factor{1.262, 1.139, 0.10, 0.25};
    MomentTarget refer{38.465, 36.365, 0.10, 0.25};
    ShareTarget eng{0.219};
    ShareTarget foreign{0.440};
    ShareTarget funding{0.490};
    ShareTarget open{0.337};
    ShareTarget article{0.838};
    ShareTarget review{0.061};
    std::optional<ValueTarget> eng_foreign_correlation = ValueTarget{0.60, 0.05};
    std::optional<ValueTarget> hhi = ValueTarget{0.011, 0.005};
    std::vector<double> impact_lag_correlations{0.77, 0.96, 0.98};  // corr(IMPACT_t, IMPACT_t+1), t = 0, 1, ...
    double lag_tolerance = 0.05;
};

/// Latent citation process. Quality q is lognormal around a linear index of the attributes; the
/// yearly citation rate is q * g(y / speed) with g(x) = x^1.5 exp(-x / 2.5), and readership
/// increments follow an earlier-peaking profile.
struct TrajectoryModel {
    double quality_sd = 0.8;
    double field_sd = 0.5;        // per-SC lognormal citation-level multiplier
    double aging_sd = 0.4;        // lognormal spread of the aging speed
    double first_year_factor = 0.4;
    double longevity_sd = 0.35;   // late-life (years 7..11) rate multiplier spread
    double readership_scale = 1.5;
    double readership_sd = 0.5;
    std::array<double, kReadershipWindowCount> readership_profile{1.0, 1.3, 0.9, 0.5, 0.3, 0.2, 0.1};
    double sc_exponent = 1.0;     // SC size weights (rank + sc_offset)^-sc_exponent
    double sc_offset = 5.0;
};

/// Exact linear model on the log scale: L_IMPACT_t11 = x.beta + noise_sd * N(0, 1) for the columns of `spec`.
struct GroundTruth {
    ModelSpec spec;
    std::map<std::string, double> beta;  // absent columns have coefficient 0
    double noise_sd = 0;
    double response_scale = 1e10;  // window-11 baseline mean written to the external table
};

struct GeneratorConfig {
    std::size_t n_records = 50000;
    std::size_t n_scs = 248;
    std::uint64_t seed = 42;
    int year_min = 2010;
    int year_max = 2012;
    double second_sc_share = 0.2;
    double auth_cap = 3221;
    CalibrationTargets targets;
    TrajectoryModel trajectory;
    std::optional<GroundTruth> ground_truth;
    double min_pass_fraction = 0.9;
    unsigned workers = 1;  // not part of the output contract
};

inline std::vector<std::pair<std::string, MomentTarget>> moment_targets(const CalibrationTargets& t) {
    return {{"AUTH", t.auth}, {"PAGES", t.pages}, {"IF", t.impact_factor}, {"REFER", t.refer}};
}

inline std::vector<std::pair<std::string, ShareTarget>> share_targets(const CalibrationTargets& t) {
    return {{"D_ENG", t.eng}, {"D_FOREIGN", t.foreign}, {"D_FUNDING", t.funding},
            {"D_OPEN", t.open},  {"D_ART", t.article},   {"D_REW", t.review}};
}

inline void validate_config(const GeneratorConfig& c) {
    std::vector<std::string> bad;
    if (c.n_scs < 2) bad.push_back("n_scs must be at least 2");
    if (c.n_records < c.n_scs) bad.push_back("n_records must be at least n_scs");
    if (c.year_min > c.year_max) bad.push_back("year_min exceeds year_max");
    if (!(c.second_sc_share >= 0 && c.second_sc_share <= 1)) bad.push_back("second_sc_share must be in [0, 1]");
    if (!(c.min_pass_fraction >= 0 && c.min_pass_fraction <= 1)) bad.push_back("min_pass_fraction must be in [0, 1]");
    const auto& t = c.targets;
    auto moment = [&](const std::string& name, const MomentTarget& m, double lowest) {
        if (!(m.mean >= lowest)) bad.push_back(name + " mean must be >= " + fixed6(lowest));
        if (!(m.sd >= 0)) bad.push_back(name + " sd must be >= 0");
        if (!(m.mean_tolerance >= 0 && m.sd_tolerance >= 0)) bad.push_back(name + " tolerances must be >= 0");
    };
    for (const auto& [name, m] : moment_targets(t)) moment(name, m, name == "AUTH" || name == "PAGES" ? 1.0 : 0.0);
    if (!(c.auth_cap >= t.auth.mean)) bad.push_back("auth_cap below the AUTH mean");
    for (const auto& [name, s] : share_targets(t)) {
        if (!(s.share >= 0 && s.share <= 1)) bad.push_back(name + " share must be in [0, 1]");
        if (!(s.tolerance >= 0)) bad.push_back(name + " tolerance must be >= 0");
    }
    if (t.article.share + t.review.share > 1) bad.push_back("D_ART + D_REW shares exceed 1");
    if (t.eng_foreign_correlation && std::abs(t.eng_foreign_correlation->target) > 1)
        bad.push_back("eng_foreign_correlation must be in [-1, 1]");
    for (double r : t.impact_lag_correlations)
        if (!(std::abs(r) <= 1)) bad.push_back("impact lag correlations must be in [-1, 1]");
    const auto& m = c.trajectory;
    for (double v : {m.quality_sd, m.field_sd, m.aging_sd, m.longevity_sd, m.readership_sd})
        if (!(v >= 0)) bad.push_back("trajectory spreads must be >= 0");
    if (!(m.first_year_factor >= 0 && m.readership_scale >= 0)) bad.push_back("trajectory scales must be >= 0");
    for (double v : m.readership_profile)
        if (!(v >= 0)) bad.push_back("readership_profile entries must be >= 0");
    if (!(m.sc_exponent >= 0 && m.sc_offset > -1)) bad.push_back("SC weight parameters out of range");
    if (c.ground_truth) {
        validate_spec(c.ground_truth->spec);
        if (!(c.ground_truth->noise_sd >= 0)) bad.push_back("ground_truth noise_sd must be >= 0");
        if (!(c.ground_truth->response_scale >= 1)) bad.push_back("ground_truth response_scale must be >= 1");
    }
    if (!bad.empty()) {
        std::string msg = "invalid generator config:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw ConfigError(msg);
    }
}

// --- JSON ---------------------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }) == known.end())
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline MomentTarget moment_from_json(const nlohmann::json& j, MomentTarget d, const std::string& where) {
    reject_unknown(j, {"mean", "sd", "mean_tolerance", "sd_tolerance"}, where);
    return {j.value("mean", d.mean), j.value("sd", d.sd), j.value("mean_tolerance", d.mean_tolerance),
            j.value("sd_tolerance", d.sd_tolerance)};
}

inline ShareTarget share_from_json(const nlohmann::json& j, ShareTarget d, const std::string& where) {
    reject_unknown(j, {"share", "tolerance"}, where);
    return {j.value("share", d.share), j.value("tolerance", d.tolerance)};
}

inline std::optional<ValueTarget> value_from_json(const nlohmann::json& j, std::optional<ValueTarget> d,
                                                  const std::string& where) {
    if (j.is_null()) return std::nullopt;
    reject_unknown(j, {"target", "tolerance"}, where);
    ValueTarget base = d.value_or(ValueTarget{});
    return ValueTarget{j.value("target", base.target), j.value("tolerance", base.tolerance)};
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const GeneratorConfig& c) {
    using J = nlohmann::ordered_json;
    auto moment = [](const MomentTarget& m) {
        return J{{"mean", m.mean}, {"sd", m.sd}, {"mean_tolerance", m.mean_tolerance}, {"sd_tolerance", m.sd_tolerance}};
    };
    auto share = [](const ShareTarget& s) { return J{{"share", s.share}, {"tolerance", s.tolerance}}; };
    auto value = [](const std::optional<ValueTarget>& v) {
        return v ? J{{"target", v->target}, {"tolerance", v->tolerance}} : J(nullptr);
    };
    const auto& t = c.targets;
    J targets;
    targets["AUTH"] = moment(t.auth);
    targets["PAGES"] = moment(t.pages);
    targets["IF"] = moment(t.impact_factor);
    targets["REFER"] = moment(t.refer);
    targets["D_ENG"] = share(t.eng);
    targets["D_FOREIGN"] = share(t.foreign);
    targets["D_FUNDING"] = share(t.funding);
    targets["D_OPEN"] = share(t.open);
    targets["D_ART"] = share(t.article);
    targets["D_REW"] = share(t.review);
    targets["eng_foreign_correlation"] = value(t.eng_foreign_correlation);
    targets["hhi"] = value(t.hhi);
    targets["impact_lag_correlations"] = J{{"values", t.impact_lag_correlations}, {"tolerance", t.lag_tolerance}};

    const auto& m = c.trajectory;
    J traj{{"quality_sd", m.quality_sd},
           {"field_sd", m.field_sd},
           {"aging_sd", m.aging_sd},
           {"first_year_factor", m.first_year_factor},
           {"longevity_sd", m.longevity_sd},
           {"readership_scale", m.readership_scale},
           {"readership_sd", m.readership_sd},
           {"readership_profile", m.readership_profile},
           {"sc_exponent", m.sc_exponent},
           {"sc_offset", m.sc_offset}};

    J j;
    j["n_records"] = c.n_records;
    j["n_scs"] = c.n_scs;
    j["seed"] = c.seed;
    j["year_min"] = c.year_min;
    j["year_max"] = c.year_max;
    j["second_sc_share"] = c.second_sc_share;
    j["auth_cap"] = c.auth_cap;
    j["targets"] = targets;
    j["trajectory"] = traj;
    if (c.ground_truth) {
        J beta = J::object();
        for (const auto& [k, v] : c.ground_truth->beta) beta[k] = v;
        j["ground_truth"] = J{{"spec", to_json(c.ground_truth->spec)},
                              {"beta", beta},
                              {"noise_sd", c.ground_truth->noise_sd},
                              {"response_scale", c.ground_truth->response_scale}};
    } else {
        j["ground_truth"] = nullptr;
    }
    j["min_pass_fraction"] = c.min_pass_fraction;
    return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    try {
        detail::reject_unknown(j,
                               {"n_records", "n_scs", "seed", "year_min", "year_max", "second_sc_share", "auth_cap",
                                "targets", "trajectory", "ground_truth", "min_pass_fraction"},
                               "generator config");
        c.n_records = j.value("n_records", c.n_records);
        c.n_scs = j.value("n_scs", c.n_scs);
        c.seed = j.value("seed", c.seed);
        c.year_min = j.value("year_min", c.year_min);
        c.year_max = j.value("year_max", c.year_max);
        c.second_sc_share = j.value("second_sc_share", c.second_sc_share);
        c.auth_cap = j.value("auth_cap", c.auth_cap);
        c.min_pass_fraction = j.value("min_pass_fraction", c.min_pass_fraction);

        if (j.contains("targets")) {
            const auto& t = j.at("targets");
            auto& d = c.targets;
            detail::reject_unknown(t,
                                   {"AUTH", "PAGES", "IF", "REFER", "D_ENG", "D_FOREIGN", "D_FUNDING", "D_OPEN", "D_ART",
                                    "D_REW", "eng_foreign_correlation", "hhi", "impact_lag_correlations"},
                                   "targets");
            if (t.contains("AUTH")) d.auth = detail::moment_from_json(t["AUTH"], d.auth, "targets.AUTH");
            if (t.contains("PAGES")) d.pages = detail::moment_from_json(t["PAGES"], d.pages, "targets.PAGES");
            if (t.contains("IF")) d.impact_factor = detail::moment_from_json(t["IF"], d.impact_factor, "targets.IF");
            if (t.contains("REFER")) d.refer = detail::moment_from_json(t["REFER"], d.refer, "targets.REFER");
            if (t.contains("D_ENG")) d.eng = detail::share_from_json(t["D_ENG"], d.eng, "targets.D_ENG");
            if (t.contains("D_FOREIGN")) d.foreign = detail::share_from_json(t["D_FOREIGN"], d.foreign, "targets.D_FOREIGN");
            if (t.contains("D_FUNDING")) d.funding = detail::share_from_json(t["D_FUNDING"], d.funding, "targets.D_FUNDING");
            if (t.contains("D_OPEN")) d.open = detail::share_from_json(t["D_OPEN"], d.open, "targets.D_OPEN");
            if (t.contains("D_ART")) d.article = detail::share_from_json(t["D_ART"], d.article, "targets.D_ART");
            if (t.contains("D_REW")) d.review = detail::share_from_json(t["D_REW"], d.review, "targets.D_REW");
            if (t.contains("eng_foreign_correlation"))
                d.eng_foreign_correlation =
                    detail::value_from_json(t["eng_foreign_correlation"], d.eng_foreign_correlation, "targets.eng_foreign_correlation");
            if (t.contains("hhi")) d.hhi = detail::value_from_json(t["hhi"], d.hhi, "targets.hhi");
            if (t.contains("impact_lag_correlations")) {
                const auto& l = t["impact_lag_correlations"];
                detail::reject_unknown(l, {"values", "tolerance"}, "targets.impact_lag_correlations");
                d.impact_lag_correlations = l.value("values", d.impact_lag_correlations);
                d.lag_tolerance = l.value("tolerance", d.lag_tolerance);
            }
        }
        if (j.contains("trajectory")) {
            const auto& t = j.at("trajectory");
            auto& m = c.trajectory;
            detail::reject_unknown(t,
                                   {"quality_sd", "field_sd", "aging_sd", "first_year_factor", "longevity_sd",
                                    "readership_scale", "readership_sd", "readership_profile", "sc_exponent", "sc_offset"},
                                   "trajectory");
            m.quality_sd = t.value("quality_sd", m.quality_sd);
            m.field_sd = t.value("field_sd", m.field_sd);
            m.aging_sd = t.value("aging_sd", m.aging_sd);
            m.first_year_factor = t.value("first_year_factor", m.first_year_factor);
            m.longevity_sd = t.value("longevity_sd", m.longevity_sd);
            m.readership_scale = t.value("readership_scale", m.readership_scale);
            m.readership_sd = t.value("readership_sd", m.readership_sd);
            m.readership_profile = t.value("readership_profile", m.readership_profile);
            m.sc_exponent = t.value("sc_exponent", m.sc_exponent);
            m.sc_offset = t.value("sc_offset", m.sc_offset);
        }
        if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
            const auto& g = j.at("ground_truth");
            detail::reject_unknown(g, {"spec", "beta", "noise_sd", "response_scale"}, "ground_truth");
            GroundTruth gt;
            gt.spec = model_spec_from_json(g.at("spec"));
            gt.beta = g.value("beta", gt.beta);
            gt.noise_sd = g.value("noise_sd", gt.noise_sd);
            gt.response_scale = g.value("response_scale", gt.response_scale);
            c.ground_truth = std::move(gt);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed generator config: ") + e.what());
    }
    validate_config(c);
    return c;
}

// --- generation ---------------------------------------------------------------------------------

struct SynthOutput {
    Corpus corpus;
    std::optional<BaselineTable> baselines;  // set in ground-truth mode
    std::size_t clamped_rows = 0;            // ground-truth rows whose window-11 count was raised to c6
};

namespace detail {

inline constexpr std::uint64_t kRecordStream = 0x5EC0Du;
inline constexpr std::uint64_t kFieldStream = 0xF1E1Du;
inline constexpr std::uint64_t kNoiseStream = 0x701CEu;

struct LogNormal {
    double mu = 0, sigma = 0;
};

// Parameters whose draws have the given mean and second moment.
inline LogNormal lognormal_for(double mean, double second_moment) {
    double s2 = std::max(0.0, std::log(second_moment / (mean * mean)));
    return {std::log(mean) - s2 / 2, std::sqrt(s2)};
}

/// Team-size model: a lognormal bulk plus a small "consortium" component with fixed spread, whose
/// weight and location are solved from the target mean and sd. Falls back to a single lognormal
/// when the tail is light.
struct AuthorModel {
    double constant = 0;  // used when sd == 0
    LogNormal bulk;
    LogNormal heavy;
    double heavy_share = 0;
    double cap = 0;
};

inline AuthorModel author_model(const MomentTarget& t, double cap) {
    AuthorModel a;
    a.cap = cap;
    if (t.sd == 0) {
        a.constant = t.mean;
        return a;
    }
    const double m = t.mean, second = t.sd * t.sd + t.mean * t.mean;
    if (t.sd > 2 * t.mean) {
        constexpr double bulk_sigma = 0.6, heavy_sigma = 0.5;
        const double b1 = 0.4 * m;
        const double b2 = b1 * b1 * std::exp(bulk_sigma * bulk_sigma);
        double pi = 0;
        for (int it = 0; it < 100; ++it) {
            double a1 = m - (1 - pi) * b1;
            double c2 = second - (1 - pi) * b2;
            pi = a1 * a1 * std::exp(heavy_sigma * heavy_sigma) / c2;
        }
        double h1 = (m - (1 - pi) * b1) / pi;
        if (pi > 0 && pi < 0.5 && h1 > b1) {
            a.bulk = {std::log(b1) - bulk_sigma * bulk_sigma / 2, bulk_sigma};
            a.heavy = {std::log(h1) - heavy_sigma * heavy_sigma / 2, heavy_sigma};
            a.heavy_share = pi;
            return a;
        }
    }
    a.bulk = lognormal_for(m, second);
    return a;
}

inline constexpr std::array<double, 3> kRefMultiplier{1.0, 2.6, 0.6};  // article, review, proceedings

struct Prepared {
    AuthorModel auth;
    LogNormal pages, impact_factor, refer;
    double eng_if_foreign = 0, eng_if_domestic = 0;
    std::vector<double> sc_cumulative;  // cumulative SC weights
    std::vector<double> field;          // per-SC citation multiplier
    std::vector<std::string> codes;
};

inline Prepared prepare(const GeneratorConfig& c) {
    const auto& t = c.targets;
    Prepared p;
    p.auth = author_model(t.auth, c.auth_cap);
    auto plain = [](const MomentTarget& m) {
        return m.sd == 0 || m.mean == 0 ? LogNormal{} : lognormal_for(m.mean, m.sd * m.sd + m.mean * m.mean);
    };
    p.pages = plain(t.pages);
    p.impact_factor = plain(t.impact_factor);
    if (t.refer.sd > 0 && t.refer.mean > 0) {
        // REFER = L * k(doc) / E[k]; choose E[L^2] so that the mixture hits the target second moment.
        double pp = std::max(0.0, 1 - t.article.share - t.review.share);
        double ek = t.article.share * kRefMultiplier[0] + t.review.share * kRefMultiplier[1] + pp * kRefMultiplier[2];
        double ek2 = t.article.share * kRefMultiplier[0] * kRefMultiplier[0] +
                     t.review.share * kRefMultiplier[1] * kRefMultiplier[1] + pp * kRefMultiplier[2] * kRefMultiplier[2];
        double second = (t.refer.sd * t.refer.sd + t.refer.mean * t.refer.mean) * ek * ek / ek2;
        p.refer = lognormal_for(t.refer.mean, std::max(second, t.refer.mean * t.refer.mean));
    }

    // P(ENG | FOREIGN) and P(ENG | not FOREIGN) reproducing the ENG share and the phi coefficient.
    double pe = t.eng.share, pf = t.foreign.share;
    double joint = pe * pf;
    if (t.eng_foreign_correlation) joint += t.eng_foreign_correlation->target * std::sqrt(pe * (1 - pe) * pf * (1 - pf));
    p.eng_if_foreign = pf > 0 ? std::clamp(joint / pf, 0.0, 1.0) : pe;
    p.eng_if_domestic = pf < 1 ? std::clamp((pe - joint) / (1 - pf), 0.0, 1.0) : pe;

    std::size_t width = std::to_string(c.n_scs).size();
    double total = 0;
    for (std::size_t j = 0; j < c.n_scs; ++j) {
        total += std::pow(static_cast<double>(j + 1) + c.trajectory.sc_offset, -c.trajectory.sc_exponent);
        p.sc_cumulative.push_back(total);
        std::string num = std::to_string(j + 1);
        p.codes.push_back("SC" + std::string(width - num.size(), '0') + num);
        std::mt19937_64 rng(derive_seed(c.seed, kFieldStream, j));
        p.field.push_back(std::exp(c.trajectory.field_sd * std::normal_distribution<double>(0, 1)(rng)));
    }
    return p;
}

inline double draw_normal(std::mt19937_64& rng) { return std::normal_distribution<double>(0, 1)(rng); }
inline double draw_uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0, 1)(rng); }
inline std::int64_t draw_poisson(std::mt19937_64& rng, double mean) {
    return mean > 0 ? std::poisson_distribution<std::int64_t>(mean)(rng) : 0;
}
inline double draw_lognormal(std::mt19937_64& rng, const LogNormal& l) { return std::exp(l.mu + l.sigma * draw_normal(rng)); }

inline double aging_profile(double year, double speed) {
    double x = (year + 0.5) / speed;
    return std::pow(x, 1.5) * std::exp(-x / 2.5);
}

inline PublicationRecord generate_record(const GeneratorConfig& c, const Prepared& p, std::size_t index) {
    const auto& t = c.targets;
    const auto& m = c.trajectory;
    std::mt19937_64 rng(derive_seed(c.seed, kRecordStream, index));
    PublicationRecord r;
    std::string num = std::to_string(index + 1);
    r.id = "P" + std::string(num.size() < 7 ? 7 - num.size() : 0, '0') + num;
    r.pub_year = c.year_min + std::uniform_int_distribution<int>(0, c.year_max - c.year_min)(rng);

    double u = draw_uniform(rng);
    r.doc_type = u < t.article.share ? DocType::article
                 : u < t.article.share + t.review.share ? DocType::review
                                                        : DocType::proceedings;

    // Subject categories: the first n_scs records seed every category once.
    auto pick_sc = [&] {
        double v = draw_uniform(rng) * p.sc_cumulative.back();
        auto it = std::upper_bound(p.sc_cumulative.begin(), p.sc_cumulative.end(), v);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - p.sc_cumulative.begin(), static_cast<std::ptrdiff_t>(c.n_scs) - 1));
    };
    std::size_t first = index < c.n_scs ? index : pick_sc();
    std::vector<std::size_t> scs{first};
    if (draw_uniform(rng) < c.second_sc_share) {
        std::size_t second = pick_sc();
        if (second != first) scs.push_back(second);
    }
    std::sort(scs.begin(), scs.end());
    double log_field = 0;
    for (auto s : scs) {
        r.sc_codes.push_back(p.codes[s]);
        log_field += std::log(p.field[s]);
    }
    double field = std::exp(log_field / static_cast<double>(scs.size()));

    if (t.auth.sd == 0) {
        r.n_authors = std::llround(p.auth.constant);
    } else {
        bool heavy = draw_uniform(rng) < p.auth.heavy_share;
        double a = draw_lognormal(rng, heavy ? p.auth.heavy : p.auth.bulk);
        r.n_authors = std::llround(std::clamp(a, 1.0, p.auth.cap));
    }
    r.foreign = draw_uniform(rng) < t.foreign.share;
    r.eng = draw_uniform(rng) < (r.foreign ? p.eng_if_foreign : p.eng_if_domestic);
    r.funding = draw_uniform(rng) < t.funding.share;
    r.open = draw_uniform(rng) < t.open.share;
    r.pages = t.pages.sd == 0 ? std::llround(t.pages.mean)
                              : std::max<std::int64_t>(1, std::llround(draw_lognormal(rng, p.pages)));
    if (t.refer.sd == 0 || t.refer.mean == 0) {
        r.n_refs = std::llround(t.refer.mean);
    } else {
        double pp = std::max(0.0, 1 - t.article.share - t.review.share);
        double ek = t.article.share * kRefMultiplier[0] + t.review.share * kRefMultiplier[1] + pp * kRefMultiplier[2];
        double k = kRefMultiplier[static_cast<std::size_t>(r.doc_type)] / ek;
        r.n_refs = std::llround(draw_lognormal(rng, p.refer) * k);
    }
    r.impact_factor = t.impact_factor.sd == 0 || t.impact_factor.mean == 0 ? t.impact_factor.mean
                                                                          : draw_lognormal(rng, p.impact_factor);

    // Latent quality and citation trajectory, years 0..11.
    double log_q = -0.2 + 0.9 * std::log1p(r.impact_factor) + 0.08 * std::log(static_cast<double>(r.n_authors)) +
                   0.15 * r.open + 0.1 * r.foreign + 0.05 * r.eng + 0.05 * r.funding +
                   0.5 * (r.doc_type == DocType::review) + 0.2 * (r.doc_type == DocType::article) +
                   0.15 * std::log1p(static_cast<double>(r.n_refs)) + 0.1 * std::log(static_cast<double>(r.pages)) +
                   m.quality_sd * draw_normal(rng);
    double q = std::exp(log_q) * field;
    double speed = std::exp(m.aging_sd * draw_normal(rng));
    double z_long = draw_normal(rng);
    double late = std::exp(m.longevity_sd * z_long - 0.06 + 0.12 * std::log1p(r.impact_factor));
    std::int64_t cum = 0;
    for (int y = 0; y <= kResponseWindow; ++y) {
        double rate = q * aging_profile(y, speed);
        if (y == 0) rate *= m.first_year_factor;
        if (y > kMaxPredictorWindow) rate *= late;
        cum += draw_poisson(rng, rate);
        int slot = citation_slot(y);
        if (slot >= 0) r.citations[static_cast<std::size_t>(slot)] = cum;
    }

    double reach = std::pow(q, 0.9) * std::exp(m.longevity_sd * z_long + m.readership_sd * draw_normal(rng)) * m.readership_scale;
    std::int64_t reads = 0;
    for (std::size_t w = 0; w < r.readerships.size(); ++w) {
        double burst = std::gamma_distribution<double>(2.0, 0.5)(rng);
        reads += draw_poisson(rng, reach * m.readership_profile[w] * burst);
        r.readerships[w] = reads;
    }
    return r;
}

// Replaces window-11 counts with the ground-truth response and returns the external baselines.
inline BaselineTable apply_ground_truth(std::vector<PublicationRecord>& records, const GroundTruth& gt, std::uint64_t seed,
                                        std::size_t& clamped) {
    Corpus provisional(records);
    BaselineTable baselines = compute_baselines(provisional);
    auto measures = normalize_corpus(provisional, baselines);
    DesignMatrix m = build_matrix(provisional, measures, gt.spec);

    auto names = m.column_names();
    std::vector<double> beta(names.size(), 0.0);
    for (const auto& [name, value] : gt.beta) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it != names.end()) {
            beta[static_cast<std::size_t>(it - names.begin())] = value;
        } else if (std::find(m.empty_dummies().begin(), m.empty_dummies().end(), name) == m.empty_dummies().end()) {
            throw ConfigError("ground_truth beta names unknown column '" + name + "'");
        }
    }

    constexpr double kMaxCount = 9.0e18;
    std::vector<double> row(names.size());
    clamped = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        m.copy_row(i, row);
        double y = 0;
        for (std::size_t j = 0; j < row.size(); ++j) y += beta[j] * row[j];
        if (gt.noise_sd > 0) {
            std::mt19937_64 rng(derive_seed(seed, kNoiseStream, i));
            y += gt.noise_sd * draw_normal(rng);
        }
        double count = gt.response_scale * (std::pow(10.0, y) - 1.0);
        if (!(count < kMaxCount)) throw ConfigError("ground-truth response overflows the count range");
        auto& r = records[i];
        std::int64_t c11 = std::llround(std::max(count, 0.0));
        std::int64_t c6 = r.citations[static_cast<std::size_t>(citation_slot(kMaxPredictorWindow))];
        if (c11 < c6) {
            c11 = c6;
            ++clamped;
        }
        r.citations[static_cast<std::size_t>(citation_slot(kResponseWindow))] = c11;
    }

    for (auto& [key, cell] : baselines.entries) cell.mean_citations[static_cast<std::size_t>(citation_slot(kResponseWindow))] = gt.response_scale;
    baselines.provenance = BaselineProvenance::external_file;
    return baselines;
}

}  // namespace detail

/// Deterministic in (config, seed); every record draws from its own sub-seeded stream, so the
/// output does not depend on the worker count.
inline SynthOutput generate(const GeneratorConfig& config) {
    validate_config(config);
    auto prepared = detail::prepare(config);
    std::vector<PublicationRecord> records(config.n_records);
    parallel_for(config.n_records, config.workers,
                 [&](std::size_t i) { records[i] = detail::generate_record(config, prepared, i); });
    std::optional<BaselineTable> baselines;
    std::size_t clamped = 0;
    if (config.ground_truth) baselines = detail::apply_ground_truth(records, *config.ground_truth, config.seed, clamped);
    return SynthOutput{Corpus(std::move(records)), std::move(baselines), clamped};
}

// --- calibration ----------------------------------------------------------------------------------

struct CalibrationRow {
    std::string variable;
    std::string statistic;  // mean, sd, share, correlation, hhi
    double target = 0;
    double achieved = 0;
    double tolerance = 0;
    bool relative = false;
    bool pass = false;
};

struct CalibrationReport {
    std::vector<CalibrationRow> rows;
    double min_pass_fraction = 0.9;

    std::size_t passed_count() const {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.pass; }));
    }
    double pass_fraction() const {
        return rows.empty() ? 1.0 : static_cast<double>(passed_count()) / static_cast<double>(rows.size());
    }
    bool passed() const { return pass_fraction() >= min_pass_fraction; }
};

/// Sample moments, shares, correlations and concentration of `corpus` against the config targets.
/// Statistics that cannot be computed (for example a constant column in a correlation) fail.
inline CalibrationReport calibration_report(const Corpus& corpus, const GeneratorConfig& config) {
    const auto& t = config.targets;
    CalibrationReport rep;
    rep.min_pass_fraction = config.min_pass_fraction;
    auto add = [&](std::string var, std::string stat, double target, double achieved, double tol, bool relative) {
        double allowed = relative ? tol * std::abs(target) : tol;
        bool pass = std::isfinite(achieved) && std::abs(achieved - target) <= allowed;
        rep.rows.push_back({std::move(var), std::move(stat), target, achieved, tol, relative, pass});
    };
    auto column = [&](const std::string& name) {
        std::vector<double> v;
        v.reserve(corpus.size());
        for (const auto& r : corpus.records()) v.push_back(feature_value(r, name));
        return v;
    };
    auto moments = [&](const std::string& name) {
        RunningMoments m;
        for (const auto& r : corpus.records()) m.add(feature_value(r, name));
        return m;
    };
    for (const auto& [name, target] : moment_targets(t)) {
        auto m = moments(name);
        add(name, "mean", target.mean, corpus.empty() ? std::nan("") : m.mean(), target.mean_tolerance, true);
        add(name, "sd", target.sd, corpus.size() < 2 ? std::nan("") : m.sd(), target.sd_tolerance, true);
    }
    for (const auto& [name, target] : share_targets(t)) {
        auto m = moments(name);
        add(name, "share", target.share, corpus.empty() ? std::nan("") : m.mean(), target.tolerance, false);
    }
    auto safe_pearson = [](const std::vector<double>& x, const std::vector<double>& y) {
        try {
            return pearson(x, y);
        } catch (const Error&) {
            return std::nan("");
        }
    };
    if (t.eng_foreign_correlation)
        add("D_ENG~D_FOREIGN", "correlation", t.eng_foreign_correlation->target, safe_pearson(column("D_ENG"), column("D_FOREIGN")),
            t.eng_foreign_correlation->tolerance, false);
    if (t.hhi) add("SC", "hhi", t.hhi->target, corpus.empty() ? std::nan("") : hhi(corpus), t.hhi->tolerance, false);
    if (!t.impact_lag_correlations.empty()) {
        std::vector<std::vector<double>> impact(kMaxPredictorWindow + 1);
        try {
            auto measures = normalize_corpus(corpus, compute_baselines(corpus));
            for (const auto& m : measures)
                for (std::size_t w = 0; w < impact.size(); ++w) impact[w].push_back(m.impact[w]);
        } catch (const Error&) {
            impact.assign(impact.size(), {});
        }
        for (std::size_t k = 0; k < t.impact_lag_correlations.size(); ++k) {
            double achieved = k + 1 < impact.size() ? safe_pearson(impact[k], impact[k + 1]) : std::nan("");
            add(impact_name(static_cast<int>(k)) + "~" + impact_name(static_cast<int>(k + 1)), "correlation",
                t.impact_lag_correlations[k], achieved, t.lag_tolerance, false);
        }
    }
    return rep;
}

inline std::string calibration_to_csv(const CalibrationReport& r) {
    std::string out = "variable,statistic,target,achieved,tolerance,tolerance_kind,pass\n";
    for (const auto& row : r.rows)
        out += csv_join({row.variable, row.statistic, fixed6(row.target), fixed6(row.achieved), fixed6(row.tolerance),
                         row.relative ? "relative" : "absolute", row.pass ? "1" : "0"}) +
               "\n";
    return out;
}

}  // namespace citeforecast
