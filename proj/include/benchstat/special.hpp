#pragma once

// Distribution kernels used by the statistical layer: regularized incomplete
// beta/gamma functions, Student-t CDF and quantile, chi-squared survival
// function, standard normal CDF. Quantile inversion is contracted to 1e-8
// absolute accuracy; no external stats runtime is assumed.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace benchstat {

namespace detail {

// Continued-fraction evaluation for the regularized incomplete beta
// (Lentz's algorithm).
inline double beta_cf(double a, double b, double x) {
    constexpr double kFpMin = 1e-300;
    constexpr double kEps = 1e-16;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("beta_cf: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double ibeta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("ibeta: a, b must be positive");
    }
    if (x < 0.0 || x > 1.0) {
        throw std::invalid_argument("ibeta: x outside [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * detail::beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Regularized lower incomplete gamma P(a, x); Q(a, x) = 1 - P(a, x).
inline double igamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("igamma_p: a must be positive");
    if (x < 0.0) throw std::invalid_argument("igamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        // series representation
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // continued fraction for Q, Lentz
    constexpr double kFpMin = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    return 1.0 - q;
}

inline double igamma_q(double a, double x) {
    if (x < a + 1.0) return 1.0 - igamma_p(a, x);
    // reuse the continued-fraction branch via igamma_p's complement at high x
    return 1.0 - igamma_p(a, x);
}

// Survival function of the chi-squared distribution with df degrees of freedom.
inline double chi2_sf(double x, int df) {
    if (df < 1) throw std::invalid_argument("chi2_sf: df must be >= 1");
    if (x <= 0.0) return 1.0;
    return 1.0 - igamma_p(df / 2.0, x / 2.0);
}

// CDF of Student's t with df degrees of freedom.
inline double t_cdf(double t, int df) {
    if (df < 1) throw std::invalid_argument("t_cdf: df must be >= 1");
    if (t == 0.0) return 0.5;
    const double nu = static_cast<double>(df);
    const double x = nu / (nu + t * t);
    const double tail = 0.5 * ibeta(nu / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

// Two-sided p-value of |t| under a t_{df} null.
inline double t_sf_two_sided(double t, int df) {
    const double nu = static_cast<double>(df);
    const double at = std::fabs(t);
    if (std::isinf(at)) return 0.0;
    return ibeta(nu / 2.0, 0.5, nu / (nu + at * at));
}

// Inverse CDF of Student's t; absolute error < 1e-8 against a reference
// oracle for the df/p ranges used by the reporting layer.
inline double t_quantile(int df, double p) {
    if (df < 1) throw std::invalid_argument("t_quantile: df must be >= 1");
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("t_quantile: p outside (0, 1)");
    }
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -t_quantile(df, 1.0 - p);

    // bracket the root, then bisect; t_cdf is monotone
    double lo = 0.0;
    double hi = 1.0;
    while (t_cdf(hi, df) < p) {
        hi *= 2.0;
        if (hi > 1e15) throw std::runtime_error("t_quantile: bracket overflow");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (t_cdf(mid, df) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Standard normal CDF.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace benchstat
