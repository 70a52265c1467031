#pragma once

// Shared generators and independent oracles for the unit tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citeforecast/corpus.hpp"
#include "citeforecast/design.hpp"

namespace testing_support {

using namespace citeforecast;

inline std::string data_path(const std::string& name) { return std::string(CITEFORECAST_TEST_DATA) + "/" + name; }

/// Fresh empty directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("citeforecast_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline PublicationRecord make_record(std::string id, std::vector<std::string> scs, int year = 2010) {
    PublicationRecord r;
    r.id = std::move(id);
    r.pub_year = year;
    r.sc_codes = std::move(scs);
    r.n_authors = 2;
    r.pages = 10;
    r.n_refs = 20;
    r.impact_factor = 1.5;
    return r;
}

inline void set_citations(PublicationRecord& r, std::int64_t start, std::int64_t step) {
    for (std::size_t k = 0; k < r.citations.size(); ++k) r.citations[k] = start + step * static_cast<std::int64_t>(k);
    for (std::size_t k = 0; k < r.readerships.size(); ++k) r.readerships[k] = start + 2 * step * static_cast<std::int64_t>(k);
}

/// Random valid record; codes drawn from SC0..SC(n_scs-1), years 2010..2012.
inline PublicationRecord random_record(std::mt19937_64& rng, std::size_t index, std::size_t n_scs) {
    std::uniform_int_distribution<int> year(2010, 2012), doc(0, 2), bit(0, 1);
    std::uniform_int_distribution<std::int64_t> small(0, 6), authors(1, 40), pages(1, 30), refs(0, 90);
    std::uniform_int_distribution<std::size_t> sc(0, n_scs - 1);
    std::uniform_real_distribution<double> impact(0.0, 6.0);
    PublicationRecord r;
    r.id = "R" + std::to_string(index);
    r.pub_year = year(rng);
    r.doc_type = static_cast<DocType>(doc(rng));
    r.n_authors = authors(rng);
    r.eng = bit(rng);
    r.foreign = bit(rng);
    r.funding = bit(rng);
    r.open = bit(rng);
    r.pages = pages(rng);
    r.n_refs = refs(rng);
    r.impact_factor = impact(rng);
    std::size_t first = sc(rng);
    r.sc_codes.push_back("SC" + std::to_string(first));
    if (bit(rng) && bit(rng)) {
        std::size_t second = sc(rng);
        if (second != first) r.sc_codes.push_back("SC" + std::to_string(second));
    }
    std::int64_t c = 0;
    for (auto& v : r.citations) v = (c += small(rng));
    std::int64_t rd = 0;
    for (auto& v : r.readerships) v = (rd += small(rng));
    return r;
}

/// Random corpus in which every SC code 0..n_scs-1 appears at least once.
inline Corpus random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t n_scs) {
    std::vector<PublicationRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = random_record(rng, i, n_scs);
        if (i < n_scs) r.sc_codes = {"SC" + std::to_string(i)};
        recs.push_back(std::move(r));
    }
    return Corpus(std::move(recs));
}

/// Coefficients from the normal equations X'X b = X'y, solved by LDLT.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd xtx = x.transpose() * x;
    Eigen::VectorXd xty = x.transpose() * y;
    return xtx.ldlt().solve(xty);
}

inline double condition_number(const Eigen::MatrixXd& x) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
    const auto& s = svd.singularValues();
    return s(0) / s(s.size() - 1);
}

struct Instance {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> names;
};

/// Random regression problem with an intercept column, n <= 50, at most 8 columns and condition
/// number below `max_condition`.
inline Instance random_instance(std::mt19937_64& rng, double max_condition = 1e4) {
    std::uniform_int_distribution<int> cols(1, 8);
    std::normal_distribution<double> z(0, 1);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (;;) {
        int p = cols(rng);
        int n = std::uniform_int_distribution<int>(p + 2, 50)(rng);
        Instance inst;
        inst.x.resize(n, p);
        inst.y.resize(n);
        std::vector<double> s(static_cast<std::size_t>(p));
        for (auto& v : s) v = scale(rng);
        for (int i = 0; i < n; ++i) {
            inst.x(i, 0) = 1.0;
            for (int j = 1; j < p; ++j) inst.x(i, j) = s[static_cast<std::size_t>(j)] * z(rng) + z(rng);
        }
        Eigen::VectorXd beta(p);
        for (int j = 0; j < p; ++j) beta[j] = 3 * z(rng);
        for (int i = 0; i < n; ++i) inst.y[i] = inst.x.row(i).dot(beta) + 0.5 * z(rng);
        if (condition_number(inst.x) >= max_condition) continue;
        inst.names.push_back(std::string(kInterceptName));
        for (int j = 1; j < p; ++j) inst.names.push_back("X" + std::to_string(j));
        return inst;
    }
}

/// Two-pass sample mean and standard deviation.
inline std::pair<double, double> two_pass(const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testing_support
