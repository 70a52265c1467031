#pragma once

// Tail probabilities for the t and F distributions and the normal quantile function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "citeforecast/errors.hpp"

namespace citeforecast {

namespace detail {

// Continued fraction for I_x(a,b) (modified Lentz). Converges quickly when x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const int max_iter = 20000 + static_cast<int>(40.0 * std::sqrt(std::max(a, b)));
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw DomainError("incomplete beta continued fraction did not converge");
}

// I_x(a,b) given both x and y = 1 - x, so callers can pass the complement without cancellation.
inline double incomplete_beta_xy(double x, double y, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(y, b, a) / b;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw DomainError("regularized_incomplete_beta requires x in [0,1] and a, b > 0");
    return detail::incomplete_beta_xy(x, 1.0 - x, a, b);
}

/// Two-sided p-value P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double t_tail(double t, double dof) {
    if (!(dof > 0.0) || std::isnan(t)) throw DomainError("t_tail requires dof > 0 and a number");
    if (std::isinf(t)) return 0.0;
    double t2 = t * t;
    double denom = dof + t2;
    double p = detail::incomplete_beta_xy(dof / denom, t2 / denom, dof / 2.0, 0.5);
    return std::clamp(p, 0.0, 1.0);
}

/// Upper-tail p-value P(F >= f) for the F distribution with (d1, d2) degrees of freedom.
inline double f_tail(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0) || std::isnan(f)) throw DomainError("f_tail requires d1, d2 > 0");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    double denom = d2 + d1 * f;
    double p = detail::incomplete_beta_xy(d2 / denom, d1 * f / denom, d2 / 2.0, d1 / 2.0);
    return std::clamp(p, 0.0, 1.0);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// Standard normal quantile: Acklam's rational approximation polished by one Newton step.
inline double inverse_normal_cdf(double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("inverse_normal_cdf requires 0 < q < 1");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double low = 0.02425;

    // Work in the lower half so the Newton residual uses the accurate tail of erfc.
    double p = q < 0.5 ? q : 1.0 - q;
    double x;
    if (p < low) {
        double r = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    } else {
        double r = p - 0.5;
        double s = r * r;
        x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
            (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
    }
    x -= (normal_cdf(x) - p) / normal_pdf(x);
    if (q == 0.5) return 0.0;
    return q < 0.5 ? x : -x;
}

}  // namespace citeforecast
