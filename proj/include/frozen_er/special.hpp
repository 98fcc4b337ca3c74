#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace frozen_er {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr double kInvE = 0.36787944117144232159552377016146087;

// Digamma via recurrence shift to x >= 6 followed by the Bernoulli
// asymptotic expansion. Absolute error below 1e-12 on (0, inf).
inline double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: requires x > 0");
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double z = 1.0 / (x * x);
    const double series =
        z * (1.0 / 12.0 +
             z * (-1.0 / 120.0 +
                  z * (1.0 / 252.0 +
                       z * (-1.0 / 240.0 +
                            z * (1.0 / 132.0 + z * (-691.0 / 32760.0))))));
    return result + std::log(x) - 0.5 / x - series;
}

// Inverse of theta -> theta * exp(-theta) on (0, 1]. Bisection: the value
// theta - theta^2/2 built on top of it stays well conditioned even though
// dx/dtheta vanishes at theta = 1.
inline double theta_from_x(double x) {
    if (!(x > 0.0) || x > kInvE * (1.0 + 1e-12))
        throw std::domain_error("theta_from_x: requires 0 < x <= 1/e");
    if (x >= kInvE * (1.0 - 1e-15)) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 90; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(-mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// T(x) = sum_{k>=1} k^(k-2) x^k / k!  for x in (0, 1/e].
// Term ratio approaches x*e, so the direct series is summed while it decays
// geometrically; close to the singular point x = 1/e the series is replaced
// by the closed form theta*(1 - theta/2) through the inverse of theta e^-theta.
inline double tree_fn(double x) {
    if (!(x > 0.0) || x > kInvE * (1.0 + 1e-12))
        throw std::domain_error("tree_fn: requires 0 < x <= 1/e");
    const double xe = x * std::exp(1.0);
    if (xe > 0.999) {
        const double theta = theta_from_x(std::min(x, kInvE));
        return theta * (1.0 - 0.5 * theta);
    }
    double sum = x, term = x;
    for (long k = 1; k < 2000000; ++k) {
        term *= x * std::exp((k - 2) * std::log1p(1.0 / k));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

struct BorelParams {
    double theta = 1.0;  // in (0, 1]
    long r = 1;          // number of roots, r = 1 for the plain Borel law

    BorelParams(double theta_, long r_) : theta(theta_), r(r_) {
        if (!(theta > 0.0) || theta > 1.0)
            throw std::domain_error("BorelParams: theta must lie in (0,1]");
        if (r < 1) throw std::domain_error("BorelParams: r must be >= 1");
    }
};

inline double borel_log_pmf(const BorelParams& p, long k) {
    return std::log(static_cast<double>(p.r)) - std::lgamma(k - p.r + 1.0) +
           (k - p.r - 1) * std::log(static_cast<double>(k)) +
           (k - p.r) * std::log(p.theta) - p.theta * k;
}

// P(T_r = k) = r/(k-r)! * k^(k-r-1) theta^(k-r) e^(-theta k), k >= r.
inline double borel_pmf(const BorelParams& p, long k) {
    if (k < p.r) return 0.0;
    return std::exp(borel_log_pmf(p, k));
}

inline double borel_mean(double theta) { return 1.0 / (1.0 - theta); }

// The component-size law mu_x(k) = k^(k-2)/k! * x^k / T(x).
struct MuX {
    double x;
    double theta;
    double t_of_x;

    static MuX from_theta(double theta) {
        if (!(theta > 0.0) || theta > 1.0)
            throw std::domain_error("MuX: theta must lie in (0,1]");
        return MuX{theta * std::exp(-theta), theta, theta * (1.0 - 0.5 * theta)};
    }
    static MuX from_x(double x) { return from_theta(theta_from_x(x)); }
};

inline double mu_log_pmf(const MuX& mu, long k) {
    if (k < 1) throw std::domain_error("mu_log_pmf: k must be positive");
    return (k - 2) * std::log(static_cast<double>(k)) - std::lgamma(k + 1.0) +
           k * std::log(mu.x) - std::log(mu.t_of_x);
}

inline double mu_pmf(const MuX& mu, long k) { return std::exp(mu_log_pmf(mu, k)); }

inline double mu_mean(double theta) { return 2.0 / (2.0 - theta); }

inline double mu_variance(double theta) {
    if (theta >= 1.0) return std::numeric_limits<double>::infinity();
    return 2.0 * theta / ((1.0 - theta) * (2.0 - theta) * (2.0 - theta));
}

// S_N(theta) = sum_{k=1}^N k^k/k! theta^(k-1) e^(-theta k).
// The loop stops early once the remaining terms are below roundoff, which
// only happens for theta bounded away from 1 where decay is geometric.
inline double partial_sum_s(long n_terms, double theta) {
    if (n_terms < 1) throw std::domain_error("partial_sum_s: n_terms >= 1");
    if (theta < 0.0 || theta > 1.0)
        throw std::domain_error("partial_sum_s: theta must lie in [0,1]");
    if (theta == 0.0) return 1.0;
    const double lt = std::log(theta);
    double sum = 0.0;
    for (long k = 1; k <= n_terms; ++k) {
        const double term =
            std::exp(k * std::log(static_cast<double>(k)) - std::lgamma(k + 1.0) +
                     (k - 1) * lt - theta * k);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGl15Node[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
inline constexpr double kGl15Weight[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

template <typename F>
double gl15(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 15; ++i) acc += kGl15Weight[i] * f(mid + half * kGl15Node[i]);
    return acc * half;
}

}  // namespace detail

// Density of the spectrally positive 3/2-stable law
//   p1(x) = 1/pi * int_0^inf exp(-(2/3) t^(3/2)) cos(x t + (2/3) t^(3/2)) dt.
// Substituting t = u^2 makes the integrand entire in u; it is then cut into
// panels holding at most one half oscillation of the cosine phase, each
// integrated by 15-point Gauss-Legendre, with the exponential damping
// truncating the range near u ~ 4.2. For x <= -6 the true value sinks below
// the quadrature noise floor, so the steepest-descent tail
// sqrt(|x|/(2 pi)) exp(-|x|^3/6) is returned instead, keeping the density
// strictly positive.
inline double stable_density_p1(double x) {
    if (x <= -6.0) return std::sqrt(-x / (2.0 * M_PI)) * std::exp(x * x * x / 6.0);
    const auto integrand = [x](double u) {
        const double u3 = (2.0 / 3.0) * u * u * u;
        return 2.0 * u * std::exp(-u3) * std::cos(x * u * u + u3);
    };
    const double u_max = 4.2;  // exp(-(2/3) 4.2^3) < 1e-21
    long double total = 0.0;
    double u = 0.0;
    while (u < u_max) {
        // phase rate bounded over the whole panel (panel length <= pi/2)
        const double ub = u + 0.5 * M_PI;
        const double h = 0.5 * M_PI / (2.0 * std::abs(x) * ub + 2.0 * ub * ub + 1.0);
        const double u2 = std::min(u + h, u_max);
        total += detail::gl15(integrand, u, u2);
        u = u2;
    }
    const double value = static_cast<double>(total) / M_PI;
    if (!std::isfinite(value))
        throw std::runtime_error("stable_density_p1: quadrature failed");
    return value;
}

}  // namespace frozen_er
