#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace frozen_er {

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double standard_error(const std::vector<double>& xs) {
    return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty sample");
    const std::size_t h = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + h, xs.end());
    double hi = xs[h];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + h - 1, xs.begin() + h);
    return 0.5 * (hi + xs[h - 1]);
}

// --- regularized incomplete gamma, for chi-square tails ---

namespace detail {

inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    // Lentz's continued fraction for Q(a,x), x > a+1
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

inline double chi2_pvalue(double statistic, double dof) {
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

// Pearson chi-square of observed counts against expected counts (same total
// up to rounding). dof defaults to bins - 1.
inline ChiSquareResult chi_square_test(const std::vector<double>& observed,
                                       const std::vector<double>& expected,
                                       long dof_reduction = 1) {
    if (observed.size() != expected.size() || observed.empty())
        throw std::invalid_argument("chi_square_test: size mismatch");
    ChiSquareResult r;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0)
            throw std::invalid_argument("chi_square_test: nonpositive expected count");
        const double d = observed[i] - expected[i];
        r.statistic += d * d / expected[i];
    }
    r.dof = static_cast<double>(observed.size()) - dof_reduction;
    r.p_value = chi2_pvalue(r.statistic, r.dof);
    return r;
}

// --- Kolmogorov-Smirnov ---

inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample KS against a continuous CDF.
inline KsResult ks_test(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    const double rn = std::sqrt(n);
    return {d, kolmogorov_q((rn + 0.12 + 0.11 / rn) * d)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

// Critical KS statistic at significance alpha for sample size n.
inline double ks_critical_value(std::size_t n, double alpha) {
    double lo = 0.0, hi = 5.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_q(mid) > alpha ? lo : hi) = mid;
    }
    const double rn = std::sqrt(static_cast<double>(n));
    return 0.5 * (lo + hi) / (rn + 0.12 + 0.11 / rn);
}

// --- reference distributions ---

inline double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

inline double poisson_log_pmf(double lambda, long k) {
    return -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
}

inline double poisson_pmf(double lambda, long k) {
    if (k < 0) return 0.0;
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(poisson_log_pmf(lambda, k));
}

inline double poisson_cdf(double lambda, long k) {
    double s = 0.0;
    for (long i = 0; i <= k; ++i) s += poisson_pmf(lambda, i);
    return std::min(s, 1.0);
}

// P(|Y - lambda| >= a) for Y ~ Poisson(lambda), computed from the pmf.
inline double poisson_two_sided_tail(double lambda, double a) {
    const long lo = static_cast<long>(std::ceil(lambda - a));
    const long hi = static_cast<long>(std::floor(lambda + a));
    double inside = 0.0;
    for (long k = std::max(lo, 0L); k <= hi; ++k) {
        if (std::abs(k - lambda) < a) inside += poisson_pmf(lambda, k);
    }
    return std::max(0.0, 1.0 - inside);
}

}  // namespace frozen_er
