#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "frozen_er/special.hpp"

namespace frozen_er {

namespace detail {

// int_0^1 (u^(1/p) - 1)/(1 - s u) du, the smooth remainder once the
// logarithmic part of the gel time series has been split off. Panels are
// halved geometrically toward u = 1 where the integrand varies on the
// scale 1 - s.
inline double gel_time_remainder(double p, double s) {
    const auto f = [p, s](double u) {
        return (std::pow(u, 1.0 / p) - 1.0) / (1.0 - s * u);
    };
    double total = 0.0;
    double w = 1.0;
    const double w_min = std::max(0.25 * (1.0 - s), 1e-18);
    while (w > w_min) {
        const double w2 = 0.5 * w;
        total += gl15(f, 1.0 - w, 1.0 - w2);
        w = w2;
    }
    total += gl15(f, 1.0 - w, 1.0);
    return total;
}

}  // namespace detail

// Time at which the gel mass fraction reaches s:
//   f_p(s) = 1/2 sum_{n>=0} s^n / (1 + p n),  s in [0, 1).
// Direct series while it decays geometrically; near s = 1 the divergent
// logarithmic part is summed in closed form.
inline double gel_curve_time(double p, double s) {
    if (!(p > 0.0) || p > 1.0)
        throw std::domain_error("gel_curve_time: p must lie in (0,1]");
    if (s < 0.0 || s >= 1.0)
        throw std::domain_error("gel_curve_time: s must lie in [0,1)");
    if (s <= 0.9) {
        double sum = 0.0, pw = 1.0;
        for (long n = 0; n < 100000; ++n) {
            const double term = pw / (1.0 + p * n);
            sum += term;
            pw *= s;
            if (pw < 1e-17 * sum * (1.0 + p * n)) break;
        }
        return 0.5 * sum;
    }
    return 0.5 - std::log1p(-s) / (2.0 * p) +
           s / (2.0 * p) * detail::gel_time_remainder(p, s);
}

// d/ds f_p(s), from the first-order relation the series satisfies.
inline double gel_curve_time_deriv(double p, double s) {
    if (s < 1e-7) return 0.5 / (1.0 + p);
    return (1.0 / (1.0 - s) - 2.0 * gel_curve_time(p, s)) / (2.0 * p * s);
}

// Deterministic limit profile of one p-frozen run: the gel mass g_p and
// everything derived from it. Construction tabulates the strictly increasing
// map s -> f_p(s); evaluation inverts it by bracketed bisection plus Newton
// polish. Immutable once built, safe to share across threads.
class GelCurve {
public:
    explicit GelCurve(double p, double s_max = 1.0 - 1e-8, int grid_points = 512)
        : p_(p), s_max_(s_max) {
        if (!(p > 0.0) || p > 1.0)
            throw std::domain_error("GelCurve: p must lie in (0,1]");
        s_grid_.resize(grid_points);
        t_grid_.resize(grid_points);
        for (int i = 0; i < grid_points; ++i) {
            // Chebyshev spacing: dense near s = 0 (the kink at t = 1/2)
            // and near the saturation end.
            const double c = std::cos(M_PI * (grid_points - 1 - i) / (grid_points - 1.0));
            s_grid_[i] = s_max * 0.5 * (1.0 + c);
            t_grid_[i] = gel_curve_time(p_, s_grid_[i]);
        }
        t_saturation_ = t_grid_.back();
    }

    double p() const { return p_; }
    double saturation_time() const { return t_saturation_; }
    bool saturated(double t) const { return t >= t_saturation_; }

    // g_p(t): zero through t = 1/2, then the inverse of f_p; clamped to
    // s_max beyond the tabulated range so downstream formulas stay finite.
    // The root is polished in the coordinate lambda = -ln(1-s), where f_p
    // is asymptotically linear with slope 1/(2p), so bracketed Newton stays
    // well conditioned arbitrarily close to s = 1.
    double mass(double t) const {
        if (t <= 0.5) return 0.0;
        if (t >= t_saturation_) return s_max_;
        const auto it = std::upper_bound(t_grid_.begin(), t_grid_.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - t_grid_.begin());
        double lam_lo = -std::log1p(-s_grid_[hi - 1]);
        double lam_hi = -std::log1p(-s_grid_[hi]);
        double lam = 0.5 * (lam_lo + lam_hi);
        for (int i = 0; i < 80; ++i) {
            const double s = -std::expm1(-lam);
            const double fv = gel_curve_time(p_, s);
            (fv < t ? lam_lo : lam_hi) = lam;
            const double slope = gel_curve_time_deriv(p_, s) * (1.0 - s);
            const double step = (fv - t) / slope;
            double next = lam - step;
            if (!(next > lam_lo) || !(next < lam_hi)) next = 0.5 * (lam_lo + lam_hi);
            if (std::abs(next - lam) < 1e-14 * (1.0 + lam)) {
                lam = next;
                break;
            }
            lam = next;
        }
        return -std::expm1(-lam);
    }

    double forest_vertices(double t) const { return 1.0 - mass(t); }
    double forest_edges(double t) const {
        const double v = 1.0 - mass(t);
        return t * v * v;
    }
    double ratio(double t) const { return t * (1.0 - mass(t)); }
    double discarded(double t) const {
        const double v = 1.0 - mass(t);
        return t - mass(t) - t * v * v;
    }

    // t_{p,k}(t) = k^(k-2)/k! (2t)^(k-1) (1-g)^k e^(-2kt(1-g)), in log space
    // so that large k cannot overflow.
    double tree_density(long k, double t) const {
        if (t < 0.0) throw std::domain_error("tree_density: t must be >= 0");
        return tree_density_given(k, t, t == 0.0 ? 1.0 : 1.0 - mass(t));
    }

    // Same, with the forest fraction v = 1 - g_p(t) supplied by the caller
    // (saves the inversion when sweeping many k at one t).
    static double tree_density_given(long k, double t, double v) {
        if (k < 1) throw std::domain_error("tree_density: k must be positive");
        if (t == 0.0) return k == 1 ? 1.0 : 0.0;
        const double lg = (k - 2) * std::log(static_cast<double>(k)) -
                          std::lgamma(k + 1.0) + (k - 1) * std::log(2.0 * t) +
                          k * std::log(v) - 2.0 * k * t * v;
        return std::exp(lg);
    }

    // sum_k k t_{p,k}(t); equals the forest vertex density 1 - g_p(t).
    double tree_density_sum(double t, double rel_tol = 1e-9) const {
        if (t == 0.0) return 1.0;
        const double v = 1.0 - mass(t);
        double sum = 0.0;
        for (long k = 1; k < 2000000; ++k) {
            const double term = k * tree_density_given(k, t, v);
            sum += term;
            if (k > 8 && term < rel_tol * sum / k) break;
        }
        return sum;
    }

private:
    double p_;
    double s_max_;
    double t_saturation_;
    std::vector<double> s_grid_;
    std::vector<double> t_grid_;
};

struct OdeResiduals {
    double gel;
    double discard;
    double tree_system;
};

// Residuals of the limit ODEs at time t, with centered differences of
// width h standing in for the exact derivatives:
//   g' = 2 p g (1-g) / (1 - 2 t (1-g))
//   d' = 2 (1-p) g (1-g) + g^2
//   t_k' = sum_{i+j=k} i j t_i t_j - 2 k t_k (1 - (1-p) g)
inline OdeResiduals ode_residuals(const GelCurve& curve, double t, long k_max = 10,
                                  double h = 1e-5) {
    if (t <= 0.5 + 1e-3)
        throw std::domain_error("ode_residuals: t must exceed 1/2 + 1e-3");
    const double p = curve.p();
    const double g = curve.mass(t);
    const double gp_num = (curve.mass(t + h) - curve.mass(t - h)) / (2.0 * h);
    const double gp_rhs = 2.0 * p * g * (1.0 - g) / (1.0 - 2.0 * t * (1.0 - g));
    const double dp_num = (curve.discarded(t + h) - curve.discarded(t - h)) / (2.0 * h);
    const double dp_rhs = 2.0 * (1.0 - p) * g * (1.0 - g) + g * g;

    double worst = 0.0;
    const double v0 = 1.0 - g;
    const double vp = 1.0 - curve.mass(t + h), vm = 1.0 - curve.mass(t - h);
    std::vector<double> tk(k_max + 1);
    for (long k = 1; k <= k_max; ++k) tk[k] = GelCurve::tree_density_given(k, t, v0);
    for (long k = 1; k <= k_max; ++k) {
        const double num = (GelCurve::tree_density_given(k, t + h, vp) -
                            GelCurve::tree_density_given(k, t - h, vm)) /
                           (2.0 * h);
        double rhs = -2.0 * k * tk[k] * (1.0 - (1.0 - p) * g);
        for (long i = 1; i < k; ++i) rhs += i * (k - i) * tk[i] * tk[k - i];
        worst = std::max(worst, std::abs(num - rhs));
    }
    return {std::abs(gp_num - gp_rhs), std::abs(dp_num - dp_rhs), worst};
}

struct IntegralIdentity {
    double lhs;
    double rhs;
};

// (1-p) int_0^inf (1 - g_p) dt against (psi(1/p) + gamma)/2. The integrand
// equals 1 up to t = 1/2 and decays like e^(-2pt) afterwards; panels of
// Gauss-Legendre cover [1/2, T] and the remaining tail is added analytically.
inline IntegralIdentity gel_integral_identity(double p) {
    if (!(p > 0.0) || p > 1.0)
        throw std::domain_error("gel_integral_identity: p must lie in (0,1]");
    const double rhs = 0.5 * (digamma(1.0 / p) + kEulerGamma);
    if (p == 1.0) return {0.0, rhs};
    GelCurve curve(p);
    const auto f = [&curve](double t) { return 1.0 - curve.mass(t); };
    const double T = std::min(12.0 / p, 0.98 * curve.saturation_time());
    double integral = 0.5;
    // dyadic panels out of the kink at t = 1/2, then a uniform sweep to T
    double w = 0x1.0p-40;
    integral += w;  // the integrand is 1 + O(w) on [1/2, 1/2 + w]
    for (; w < 0.25; w *= 2.0) integral += detail::gl15(f, 0.5 + w, 0.5 + 2.0 * w);
    for (double a = 0.5 + w; a < T; a += 0.25)
        integral += detail::gl15(f, a, std::min(a + 0.25, T));
    // tail: 1 - g_p(t) ~ e^(-(psi(1/p)+gamma)) e^(-2pt)
    integral += std::exp(-(digamma(1.0 / p) + kEulerGamma) - 2.0 * p * T) / (2.0 * p);
    return {(1.0 - p) * integral, rhs};
}

// t^(k)_(p,n) = ln(n)/(kp) + (k-1)/(kp) ln(ln(n)/(kp)), the time scale at
// which trees of size k die out.
inline double threshold_time(double p, long k, double n) {
    if (n < 3.0) throw std::domain_error("threshold_time: n must be >= 3");
    if (k < 1) throw std::domain_error("threshold_time: k must be >= 1");
    const double kp = k * p;
    return std::log(n) / kp + (k - 1) / kp * std::log(std::log(n) / kp);
}

struct GumbelParams {
    double scale;  // multiplies the standard Gumbel variable
    double shift;  // deterministic location
};

// Limit law of the centered absorption time A^(k+)/n - t^(k)/2:
// scale/shift of the Gumbel in  Gu/(2kp) - (psi(1/p)+gamma)/(2p)
//                               + ln(k^(k-2)/k!)/(2kp).
inline GumbelParams absorption_gumbel_params(double p, long k) {
    const double log_ck = (k - 2) * std::log(static_cast<double>(k)) -
                          std::lgamma(k + 1.0);
    return {1.0 / (2.0 * k * p),
            -(digamma(1.0 / p) + kEulerGamma) / (2.0 * p) + log_ck / (2.0 * k * p)};
}

// ln(n)-scale constant for the i-th largest tree at time t:
// 1/(2r - 1 - ln 2r) with r = t (1 - g_p(t)). Degenerates at r = 1/2.
inline double largest_tree_constant(const GelCurve& curve, double t) {
    const double r = curve.ratio(t);
    const double x = 2.0 * r;
    if (std::abs(x - 1.0) < 1e-9)
        throw std::domain_error("largest_tree_constant: critical ratio r = 1/2");
    return 1.0 / (x - 1.0 - std::log(x));
}

}  // namespace frozen_er
