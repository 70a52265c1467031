#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "citeforecast/special_functions.hpp"

using namespace citeforecast;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb, double whole,
               double eps, int depth) {
    double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
    return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) + simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 1e-14, 50);
}

// Maclaurin series of erf, adequate for |x| < 3.
double erf_series(double x) {
    double sum = 0, term = x;
    for (int n = 0; n < 200; ++n) {
        sum += term / (2 * n + 1);
        term *= -x * x / (n + 1);
    }
    return 2 / std::sqrt(std::numbers::pi) * sum;
}

double phi_inverse_by_bisection(double q) {
    double lo = -6, hi = 6;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (0.5 * (1 + erf_series(mid / std::numbers::sqrt2)) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(IncompleteBeta, UniformCase) {
    for (double x : {0.0, 0.3, 1.0}) EXPECT_NEAR(regularized_incomplete_beta(x, 1, 1), x, 1e-14);
}

TEST(IncompleteBeta, SymmetricHalf) {
    for (double a : {0.5, 2.0, 7.0}) EXPECT_NEAR(regularized_incomplete_beta(0.5, a, a), 0.5, 1e-14);
}

TEST(IncompleteBeta, QuadratureOracle) {
    auto density = [](double a, double b) {
        double norm = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
        return [=](double t) { return norm * std::pow(t, a - 1) * std::pow(1 - t, b - 1); };
    };
    EXPECT_NEAR(regularized_incomplete_beta(0.25, 2, 3), integrate(density(2, 3), 0, 0.25), 1e-10);
    for (auto [x, a, b] : {std::tuple{0.1, 3.0, 4.0}, {0.7, 5.0, 2.0}, {0.45, 10.0, 12.0}, {0.9, 1.5, 8.0}})
        EXPECT_NEAR(regularized_incomplete_beta(x, a, b), integrate(density(a, b), 0, x), 1e-10) << x << " " << a << " " << b;
}

TEST(IncompleteBeta, ReflectionIdentity) {
    for (double x = 0.05; x < 1; x += 0.1)
        EXPECT_NEAR(regularized_incomplete_beta(x, 2.5, 4), 1 - regularized_incomplete_beta(1 - x, 4, 2.5), 1e-13);
}

TEST(IncompleteBeta, Domain) {
    EXPECT_THROW(regularized_incomplete_beta(-0.1, 1, 1), DomainError);
    EXPECT_THROW(regularized_incomplete_beta(0.5, 0, 1), DomainError);
    EXPECT_THROW(regularized_incomplete_beta(0.5, 1, -2), DomainError);
}

TEST(Tails, Examples) {
    EXPECT_EQ(t_tail(0, 5), 1.0);
    EXPECT_NEAR(t_tail(1.96, 1e6), 0.05, 5e-4);
    EXPECT_EQ(f_tail(0, 2, 10), 1.0);
    EXPECT_THROW(t_tail(1, 0), DomainError);
    EXPECT_THROW(f_tail(1, 0, 3), DomainError);
}

TEST(Tails, ClosedForms) {
    // t with 1 dof is Cauchy; F(2, d2) has a closed-form tail.
    for (double t : {0.5, 1.0, 3.0, 10.0}) EXPECT_NEAR(t_tail(t, 1), 1 - 2 / std::numbers::pi * std::atan(t), 1e-13);
    for (double f : {0.5, 1.0, 4.0}) EXPECT_NEAR(f_tail(f, 2, 10), std::pow(1 + 2 * f / 10, -5.0), 1e-13);
    EXPECT_NEAR(f_tail(9.0, 1, 7), t_tail(3.0, 7), 1e-13);
}

TEST(InverseNormal, Examples) {
    EXPECT_EQ(inverse_normal_cdf(0.5), 0.0);
    for (double q : {0.01, 0.2}) EXPECT_NEAR(inverse_normal_cdf(q), -inverse_normal_cdf(1 - q), 1e-15);
    EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959964, 1e-6);
    EXPECT_THROW(inverse_normal_cdf(0), DomainError);
    EXPECT_THROW(inverse_normal_cdf(1), DomainError);
}

TEST(InverseNormal, BisectionOracle) {
    for (double q = 0.005; q < 1; q += 0.0125) EXPECT_NEAR(inverse_normal_cdf(q), phi_inverse_by_bisection(q), 1e-9) << q;
    EXPECT_NEAR(inverse_normal_cdf(0.975), phi_inverse_by_bisection(0.975), 1e-9);
}

TEST(InverseNormal, RoundTripsThroughCdf) {
    for (double q : {1e-10, 1e-6, 0.001, 0.3, 0.999, 1 - 1e-9}) EXPECT_NEAR(normal_cdf(inverse_normal_cdf(q)) / q, 1.0, 1e-9);
}
