#pragma once

// Regularized incomplete gamma and the chi-squared quantile used by the
// Gaussian plug-in certificate radius.

#include <cmath>
#include <stdexcept>

namespace place {

namespace detail {

// P(a, x) by power series, for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) = 1 - P(a, x) by Lentz continued fraction, for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

/// Chi-squared CDF with ell degrees of freedom.
inline double chi2_cdf(double x, std::size_t ell) {
    return gamma_p(static_cast<double>(ell) / 2.0, x / 2.0);
}

/// Chi-squared quantile: the x with CDF(x) = p, found by bisection on the
/// CDF to absolute tolerance 1e-8.
inline double chi2_quantile(std::size_t ell, double p) {
    if (ell < 1) throw std::invalid_argument("chi2_quantile: ell must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chi2_quantile: p must be in (0, 1)");
    double lo = 0.0;
    double hi = static_cast<double>(ell) + 10.0 * std::sqrt(2.0 * static_cast<double>(ell)) + 10.0;
    while (chi2_cdf(hi, ell) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, ell) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace place
