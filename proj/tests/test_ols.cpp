#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "citeforecast/ols.hpp"
#include "support.hpp"

using namespace citeforecast;
using namespace testing_support;

namespace {

DesignMatrix simple_line(std::initializer_list<std::pair<double, double>> pts) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(pts.size()), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
    Eigen::Index i = 0;
    for (auto [a, b] : pts) {
        x(i, 0) = 1;
        x(i, 1) = a;
        y[i++] = b;
    }
    return DesignMatrix::from_dense({"INTERCEPT", "X"}, x, y, true);
}

DesignMatrix dense(const Instance& inst) { return DesignMatrix::from_dense(inst.names, inst.x, inst.y, true); }

}  // namespace

TEST(Fit, ExactLine) {
    auto f = fit(simple_line({{0, 1}, {1, 3}, {2, 5}}));
    EXPECT_NEAR(f.estimate("INTERCEPT"), 1.0, 1e-12);
    EXPECT_NEAR(f.estimate("X"), 2.0, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(f.residuals[i], 0.0, 1e-12);
}

TEST(Fit, HandComputedThreePoints) {
    auto f = fit(simple_line({{0, 0}, {1, 1}, {2, 1}}));
    EXPECT_NEAR(f.estimate("INTERCEPT"), 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(f.estimate("X"), 0.5, 1e-12);
    EXPECT_NEAR(f.rss, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(f.r2, 0.75, 1e-12);
    EXPECT_NEAR(f.adjusted_r2, 0.5, 1e-12);
    EXPECT_NEAR(f.rse, 0.408248, 1e-6);
    EXPECT_NEAR(f.f_statistic, 3.0, 1e-12);
    EXPECT_EQ(f.dof, 1u);
    EXPECT_EQ(f.n, 3u);
    // F(1,1) = 3 -> p = 1 - (2/pi) atan(sqrt(3)) = 1/3.
    EXPECT_NEAR(f.p_value_f, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(f.find("X")->p_value, 1.0 / 3.0, 1e-12);
}

TEST(Fit, DuplicatedColumnIsAliased) {
    std::mt19937_64 rng(1);
    auto inst = random_instance(rng);
    while (inst.x.cols() < 3) inst = random_instance(rng);
    Eigen::MatrixXd x2(inst.x.rows(), inst.x.cols() + 1);
    x2 << inst.x, inst.x.col(1);
    auto names = inst.names;
    names.push_back("COPY");
    auto dup = fit(DesignMatrix::from_dense(names, x2, inst.y, true));
    auto base = fit(dense(inst));
    EXPECT_EQ(dup.aliased, std::vector<std::string>{"COPY"});
    ASSERT_EQ(dup.coefficients.size(), base.coefficients.size());
    for (std::size_t j = 0; j < base.coefficients.size(); ++j) {
        EXPECT_EQ(dup.coefficients[j].name, base.coefficients[j].name);
        EXPECT_NEAR(dup.coefficients[j].estimate, base.coefficients[j].estimate, 1e-9);
        EXPECT_NEAR(dup.coefficients[j].std_error, base.coefficients[j].std_error, 1e-9);
    }
    EXPECT_EQ(dup.dof, base.dof);
    EXPECT_NEAR(dup.rss, base.rss, 1e-9);
}

TEST(Fit, LastOfTheDependentColumnsIsDropped) {
    Eigen::MatrixXd x(5, 4);
    x << 1, 1, 0, 1,  //
        1, 0, 1, 1,   //
        1, 1, 0, 1,   //
        1, 0, 1, 1,   //
        1, 0, 1, 1;
    Eigen::VectorXd y(5);
    y << 1, 2, 1.5, 2.5, 2;
    auto f = fit(DesignMatrix::from_dense({"INTERCEPT", "A", "B", "C"}, x, y, true));
    EXPECT_EQ(f.aliased, (std::vector<std::string>{"B", "C"}));
    EXPECT_EQ(f.dof, 3u);
}

TEST(Fit, Errors) {
    EXPECT_THROW(fit(simple_line({{0, 1}, {1, 2}})), UnderdeterminedError);
    Eigen::MatrixXd x(3, 1);
    x << 1, 1, 1;
    Eigen::VectorXd y(3);
    y << 1, NAN, 2;
    EXPECT_THROW(fit(DesignMatrix::from_dense({"INTERCEPT"}, x, y, true)), NonFiniteError);
}

TEST(Fit, InterceptOnlyModel) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 6;
    auto f = fit(DesignMatrix::from_dense({"INTERCEPT"}, x, y, true));
    EXPECT_NEAR(f.estimate("INTERCEPT"), 3.0, 1e-12);
    EXPECT_EQ(f.r2, 0.0);
    EXPECT_EQ(f.f_statistic, 0.0);
    EXPECT_EQ(f.p_value_f, 1.0);
}

TEST(Fit, BlockSizeDoesNotMatter) {
    std::mt19937_64 rng(2);
    auto inst = random_instance(rng);
    auto a = fit(dense(inst));
    FitOptions o;
    o.block_rows = 3;
    auto b = fit(dense(inst), o);
    for (std::size_t j = 0; j < a.coefficients.size(); ++j)
        EXPECT_NEAR(a.coefficients[j].estimate, b.coefficients[j].estimate, 1e-10 * std::max(1.0, std::abs(a.coefficients[j].estimate)));
}

TEST(Fit, RowSelectionMatchesExplicitSubset) {
    std::mt19937_64 rng(3);
    auto inst = random_instance(rng);
    std::vector<std::uint32_t> rows;
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(inst.x.rows() - 1));
    for (Eigen::Index i = 0; i < inst.x.rows() + 5; ++i) rows.push_back(pick(rng));
    FitOptions o;
    o.rows = rows;
    auto sel = fit(dense(inst), o);
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(rows.size()), inst.x.cols());
    Eigen::VectorXd ys(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        xs.row(static_cast<Eigen::Index>(i)) = inst.x.row(rows[i]);
        ys[static_cast<Eigen::Index>(i)] = inst.y[rows[i]];
    }
    auto direct = fit(DesignMatrix::from_dense(inst.names, xs, ys, true));
    ASSERT_EQ(sel.coefficients.size(), direct.coefficients.size());
    for (std::size_t j = 0; j < sel.coefficients.size(); ++j)
        EXPECT_NEAR(sel.coefficients[j].estimate, direct.coefficients[j].estimate, 1e-9);
    EXPECT_NEAR(sel.rss, direct.rss, 1e-9);
    EXPECT_EQ(sel.n, rows.size());
}

TEST(FitProperty, MatchesNormalEquationsOracle) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        auto inst = random_instance(rng);
        auto f = fit(dense(inst));
        Eigen::VectorXd oracle = normal_equations(inst.x, inst.y);
        ASSERT_TRUE(f.aliased.empty());
        for (Eigen::Index j = 0; j < oracle.size(); ++j)
            EXPECT_LE(relative_error(f.coefficients[static_cast<std::size_t>(j)].estimate, oracle[j]), 1e-8);
        // Textbook standard errors: sigma^2 diag((X'X)^-1).
        Eigen::MatrixXd inv = (inst.x.transpose() * inst.x).inverse();
        for (Eigen::Index j = 0; j < oracle.size(); ++j)
            EXPECT_LE(relative_error(f.coefficients[static_cast<std::size_t>(j)].std_error, std::sqrt(f.rss / static_cast<double>(f.dof) * inv(j, j))), 1e-8);
    }
}

TEST(FitProperty, ResidualsAreOrthogonalAndSumToZero) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = random_instance(rng);
        auto f = fit(dense(inst));
        double n = static_cast<double>(inst.x.rows());
        Eigen::VectorXd g = inst.x.transpose() * f.residuals;
        for (Eigen::Index j = 0; j < g.size(); ++j) EXPECT_LT(std::abs(g[j]), 1e-8 * n);
        EXPECT_LT(std::abs(f.residuals.sum()), 1e-8 * n);
        EXPECT_NEAR(f.rss, f.residuals.squaredNorm(), 1e-12 * std::max(1.0, f.rss));
        EXPECT_NEAR(f.rse, std::sqrt(f.rss / static_cast<double>(f.dof)), 1e-12);
        EXPECT_LE(f.adjusted_r2, f.r2);
        if (inst.x.cols() > 1 && f.r2 < 1) EXPECT_LT(f.adjusted_r2, f.r2);
        for (const auto& c : f.coefficients) {
            EXPECT_GE(c.p_value, 0.0);
            EXPECT_LE(c.p_value, 1.0);
        }
    }
}

TEST(FitProperty, RowPermutationInvariance) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        auto inst = random_instance(rng);
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(inst.x.rows()));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Instance shuffled = inst;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            shuffled.x.row(static_cast<Eigen::Index>(i)) = inst.x.row(perm[i]);
            shuffled.y[static_cast<Eigen::Index>(i)] = inst.y[perm[i]];
        }
        auto a = fit(dense(inst));
        auto b = fit(dense(shuffled));
        for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
            EXPECT_NEAR(a.coefficients[j].estimate, b.coefficients[j].estimate, 1e-10 * std::max(1.0, std::abs(a.coefficients[j].estimate)));
            EXPECT_NEAR(a.coefficients[j].std_error, b.coefficients[j].std_error, 1e-10);
            EXPECT_NEAR(a.coefficients[j].p_value, b.coefficients[j].p_value, 1e-10);
        }
        EXPECT_NEAR(a.rss, b.rss, 1e-10 * std::max(1.0, a.rss));
        EXPECT_NEAR(a.r2, b.r2, 1e-10);
        EXPECT_NEAR(a.adjusted_r2, b.adjusted_r2, 1e-10);
        EXPECT_NEAR(a.f_statistic, b.f_statistic, 1e-10 * std::max(1.0, a.f_statistic));
        EXPECT_NEAR(a.rse, b.rse, 1e-10);
    }
}

TEST(FitProperty, ColumnScalingEquivariance) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mag(0.2, 20);
    for (int trial = 0; trial < 100; ++trial) {
        auto inst = random_instance(rng);
        if (inst.x.cols() < 2) continue;
        Eigen::Index j = std::uniform_int_distribution<Eigen::Index>(1, inst.x.cols() - 1)(rng);
        double k = mag(rng) * (trial % 2 ? -1 : 1);
        Instance scaled = inst;
        scaled.x.col(j) *= k;
        auto a = fit(dense(inst));
        auto b = fit(dense(scaled));
        auto ju = static_cast<std::size_t>(j);
        EXPECT_LE(relative_error(b.coefficients[ju].estimate, a.coefficients[ju].estimate / k), 1e-10);
        auto rel = [](double u, double v) { return std::abs(u - v) / std::max(1e-12, std::abs(v)); };
        EXPECT_LE(rel(b.rss, a.rss), 1e-10);
        EXPECT_LE(std::abs(b.r2 - a.r2), 1e-10);
        EXPECT_LE(rel(b.f_statistic, a.f_statistic), 1e-10);
        Eigen::VectorXd fa = inst.y - a.residuals, fb = scaled.y - b.residuals;
        EXPECT_LE((fa - fb).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, fa.cwiseAbs().maxCoeff()));
    }
}

TEST(FitProperty, PValuesDecreaseInAbsoluteT) {
    for (double dof : {1.0, 5.0, 30.0, 1000.0}) {
        double prev = t_tail(0, dof);
        EXPECT_EQ(prev, 1.0);
        for (double t = 0.25; t < 20; t += 0.25) {
            double p = t_tail(t, dof);
            EXPECT_LT(p, prev);
            EXPECT_EQ(p, t_tail(-t, dof));
            prev = p;
        }
    }
}

TEST(AdjustedR2, Examples) {
    EXPECT_EQ(adjusted_r2(1.0, 10, 3), 1.0);
    EXPECT_DOUBLE_EQ(adjusted_r2(0.75, 3, 1), 0.5);
    EXPECT_DOUBLE_EQ(adjusted_r2(0.0, 11, 2), -0.25);
    EXPECT_THROW(adjusted_r2(0.5, 3, 2), DomainError);
}

TEST(Predict, InterceptOnly) {
    FitResult f;
    f.coefficients.push_back({"INTERCEPT", 0.7});
    auto p = predict(f, {});
    EXPECT_EQ(p.log_scale, 0.7);
    EXPECT_NEAR(p.back_transformed, std::pow(10.0, 0.7) - 1, 1e-12);
}

TEST(Predict, ExactFitInterpolatesTrainingRow) {
    auto f = fit(simple_line({{0, 1}, {1, 3}, {2, 5}}));
    EXPECT_NEAR(predict(f, {{"X", 1.0}}).log_scale, 3.0, 1e-12);
}

TEST(Predict, DotProductOracleAndFloor) {
    std::mt19937_64 rng(8);
    auto inst = random_instance(rng);
    while (inst.x.cols() < 3) inst = random_instance(rng);
    auto f = fit(dense(inst));
    std::map<std::string, double> feats;
    double oracle = f.estimate("INTERCEPT");
    for (std::size_t j = 1; j < inst.names.size(); ++j) {
        double v = 0.1 * static_cast<double>(j);
        feats[inst.names[j]] = v;
        oracle += v * f.coefficients[j].estimate;
    }
    EXPECT_NEAR(predict(f, feats).log_scale, oracle, 1e-12);
    feats.erase(inst.names[1]);
    EXPECT_THROW(predict(f, feats), MissingFeatureError);

    FitResult neg;
    neg.coefficients.push_back({"INTERCEPT", -2.0});
    EXPECT_EQ(predict(neg, {}).back_transformed, 0.0);
}

TEST(Predict, MissingDummyDefaultsToZero) {
    FitResult f;
    f.coefficients.push_back({"INTERCEPT", 0.5});
    f.coefficients.push_back({"D_SUBCAT_B", 1.0});
    EXPECT_EQ(predict(f, {}).log_scale, 0.5);
    EXPECT_EQ(predict(f, {{"D_SUBCAT_B", 1.0}}).log_scale, 1.5);
}

TEST(Serialization, JsonRoundTripAndCsvLayout) {
    auto f = fit(simple_line({{0, 0}, {1, 1}, {2, 1}}));
    auto back = fit_from_json(fit_to_json(f));
    ASSERT_EQ(back.coefficients.size(), f.coefficients.size());
    for (std::size_t j = 0; j < f.coefficients.size(); ++j) {
        EXPECT_EQ(back.coefficients[j].name, f.coefficients[j].name);
        EXPECT_EQ(back.coefficients[j].estimate, f.coefficients[j].estimate);
    }
    EXPECT_EQ(back.dof, f.dof);
    EXPECT_EQ(back.adjusted_r2, f.adjusted_r2);
    auto csv = fit_to_csv(f);
    EXPECT_EQ(csv.rfind("variable,estimate,std_error,t_value,p_value,stars\n", 0), 0u);
    EXPECT_NE(csv.find("\nadjusted_r2,f_statistic,p_value_f,rse,dof,n,aliased\n0.500000,3.000000,0.333333,0.408248,1,3,\n"),
              std::string::npos);
}

TEST(Serialization, PerfectFitHasInfiniteF) {
    auto f = fit(simple_line({{0, 1}, {1, 3}, {2, 5}, {3, 7}}));
    EXPECT_TRUE(std::isinf(f.f_statistic));
    auto j = fit_to_json(f);
    EXPECT_TRUE(j["f_statistic"].is_null());
    EXPECT_TRUE(std::isinf(fit_from_json(j).f_statistic));
}

TEST(Stars, DefaultAndCustomThresholds) {
    EXPECT_EQ(significance_stars(0.005), "***");
    EXPECT_EQ(significance_stars(0.03), "**");
    EXPECT_EQ(significance_stars(0.07), "*");
    EXPECT_EQ(significance_stars(0.2), "");
    EXPECT_EQ(significance_stars(0.03, {0.05, 0.1, 0.2}), "***");
}
