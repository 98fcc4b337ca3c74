#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "frozen_er/exact.hpp"
#include "frozen_er/special.hpp"

namespace frozen_er {

// Exact table of #W(N, M), the number of labeled forests on N vertices with
// M edges. Built once through the recurrence on the tree containing vertex 1:
//   F(N, T) = sum_j C(N-1, j-1) j^(j-2) F(N-j, T-1),   T = number of trees,
// anchored at F(0,0) = 1. Immutable afterwards and shareable across threads.
class ForestCountTable {
public:
    explicit ForestCountTable(long max_n = 400) : max_n_(max_n) {
        if (max_n < 1) throw std::invalid_argument("ForestCountTable: max_n >= 1");
        std::vector<BigInt> tree_counts(max_n + 1);
        for (long j = 1; j <= max_n; ++j) tree_counts[j] = cayley_count(j);
        std::vector<std::vector<BigInt>> binom(max_n + 1);
        for (long i = 0; i <= max_n; ++i) {
            binom[i].resize(i + 1);
            binom[i][0] = 1;
            for (long j = 1; j <= i; ++j)
                binom[i][j] = binom[i - 1][j - 1] + (j <= i - 1 ? binom[i - 1][j] : 0);
        }
        rows_.resize(max_n + 1);
        rows_[0] = {BigInt(1)};
        for (long n = 1; n <= max_n; ++n) {
            rows_[n].assign(n + 1, BigInt(0));
            for (long t = 1; t <= n; ++t) {
                BigInt acc = 0;
                for (long j = 1; j <= n - t + 1; ++j)
                    acc += binom[n - 1][j - 1] * tree_counts[j] * rows_[n - j][t - 1];
                rows_[n][t] = std::move(acc);
            }
        }
    }

    long max_n() const { return max_n_; }

    // #W(N, M) with the transition-kernel conventions:
    // #W(0,0) = 1, #W(N,N) = 0, #W(-1,0) = 0, and 0 whenever M > N-1 or M < 0.
    BigInt count(long n_vertices, long n_edges) const {
        if (n_vertices == 0 && n_edges == 0) return 1;
        if (n_vertices < 1) return 0;
        if (n_edges < 0 || n_edges > n_vertices - 1) return 0;
        if (n_vertices > max_n_)
            throw std::out_of_range("ForestCountTable: N exceeds max_n");
        return rows_[n_vertices][n_vertices - n_edges];
    }

    double log_count(long n_vertices, long n_edges) const {
        return big_log(count(n_vertices, n_edges));
    }

private:
    long max_n_;
    std::vector<std::vector<BigInt>> rows_;
};

// Relative deviation between the exact count and the random-walk identity
//   #W(N,M) = N!/(N-M)! * T(x)^(N-M) / x^N * P(S_(N-M) = N),  x = theta e^-theta,
// with the hitting probability evaluated by dense convolution of mu_x.
// Independent of theta by construction; deviations beyond ~1e-12 indicate
// a defect on either side.
inline double count_identity_deviation(const ForestCountTable& table, long N, long M,
                                       double theta) {
    if (M < 0 || M > N - 1)
        throw std::invalid_argument("count_identity_deviation: need 0 <= M <= N-1");
    const long T = N - M;
    const MuX mu = MuX::from_theta(theta);
    std::vector<double> pmf(N + 1, 0.0);
    for (long k = 1; k <= N; ++k) pmf[k] = mu_pmf(mu, k);
    std::vector<double> walk(N + 1, 0.0), next(N + 1);
    walk[0] = 1.0;
    for (long j = 0; j < T; ++j) {
        std::fill(next.begin(), next.end(), 0.0);
        for (long s = j; s <= N - (T - j); ++s) {
            if (walk[s] == 0.0) continue;
            for (long k = 1; s + k <= N; ++k) next[s + k] += walk[s] * pmf[k];
        }
        walk.swap(next);
    }
    const double log_walk = std::lgamma(N + 1.0) - std::lgamma(T + 1.0) +
                            T * std::log(mu.t_of_x) - N * std::log(mu.x) +
                            std::log(walk[N]);
    return std::abs(std::expm1(log_walk - table.log_count(N, M)));
}

enum class ForestRegime { Subcritical, NearCritical, Supercritical };

struct BritikovEstimate {
    ForestRegime regime;
    double omega;          // (2M - N) / N^(2/3)
    double log_estimate;   // log of the chosen asymptotic count
    // Second opinion when |omega| falls in the overlap band [0.5, 2] where
    // the asymptotic regimes give no clean separation at finite N.
    std::optional<double> log_alternative;
};

namespace detail {

inline double britikov_log_sub(long N, long M) {
    return 2.0 * M * std::log(static_cast<double>(N)) - M * std::log(2.0) -
           std::lgamma(M + 1.0) + 0.5 * std::log(1.0 - 2.0 * M / static_cast<double>(N));
}

inline double britikov_log_near(long N, long M) {
    const double omega = (2.0 * M - N) / std::pow(static_cast<double>(N), 2.0 / 3.0);
    return (N - 1.0 / 6.0) * std::log(static_cast<double>(N)) -
           (N - M) * std::log(2.0) - std::lgamma(N - M + 1.0) +
           std::log(std::sqrt(2.0 * M_PI) * stable_density_p1(omega));
}

inline double britikov_log_super(long N, long M) {
    return (N - 2.0) * std::log(static_cast<double>(N)) -
           (N - M - 1) * std::log(2.0) - std::lgamma(static_cast<double>(N - M)) -
           2.5 * std::log(2.0 * M / static_cast<double>(N) - 1.0);
}

}  // namespace detail

// Asymptotic forest count in the regime selected by omega against the given
// cutoff (the boundaries are asymptotic; the cutoff is a finite-N choice).
inline BritikovEstimate britikov_asymptotic(long N, long M, double cutoff = 1.0) {
    if (M < 1 || M > N - 1)
        throw std::invalid_argument("britikov_asymptotic: need 1 <= M <= N-1");
    const double omega = (2.0 * M - N) / std::pow(static_cast<double>(N), 2.0 / 3.0);
    BritikovEstimate out{ForestRegime::NearCritical, omega, 0.0, std::nullopt};
    if (omega <= -cutoff) {
        out.regime = ForestRegime::Subcritical;
        out.log_estimate = detail::britikov_log_sub(N, M);
    } else if (omega >= cutoff) {
        out.regime = ForestRegime::Supercritical;
        out.log_estimate = detail::britikov_log_super(N, M);
    } else {
        out.log_estimate = detail::britikov_log_near(N, M);
    }
    const double a = std::abs(omega);
    if (a >= 0.5 && a <= 2.0) {
        if (out.regime == ForestRegime::NearCritical)
            out.log_alternative = omega < 0 ? detail::britikov_log_sub(N, M)
                                            : detail::britikov_log_super(N, M);
        else
            out.log_alternative = detail::britikov_log_near(N, M);
    }
    return out;
}

// One step of the frozen process seen through (V, E, G) only.
struct KernelState {
    long n;  // total vertices
    long v;  // forest vertices
    long e;  // forest edges
    long g;  // gel size

    KernelState(long n_, long v_, long e_, long g_) : n(n_), v(v_), e(e_), g(g_) {
        if (v + g != n) throw std::invalid_argument("KernelState: v + g must equal n");
        if (e < 0 || e > std::max(v - 1, 0L))
            throw std::invalid_argument("KernelState: e out of range");
    }
};

// P(Delta G = k | state), exact:
//   C(v,k) k^(k-2) #W(v-k, e-k+1)/#W(v,e) * (k(k-1) + 2 p k g)/(n(n-1))
// with p given as an exact rational.
inline BigRat gel_jump_pmf_exact(const ForestCountTable& table, const BigRat& p,
                                 const KernelState& st, long k) {
    if (k < 1 || k > st.e + 1 || k > st.v) return 0;
    const BigInt numerator = big_binomial(st.v, k) * cayley_count(k) *
                             table.count(st.v - k, st.e - k + 1);
    const BigRat forest_part(numerator, table.count(st.v, st.e));
    const BigRat pair_part =
        (BigRat(k * (k - 1)) + BigRat(2 * k * st.g) * p) /
        BigRat(static_cast<long long>(st.n) * (st.n - 1));
    return forest_part * pair_part;
}

inline double gel_jump_pmf(const ForestCountTable& table, double p,
                           const KernelState& st, long k) {
    // go through exact rationals; the counts dwarf double range long before
    // the ratio does
    const BigRat pr(p);
    return gel_jump_pmf_exact(table, pr, st, k).convert_to<double>();
}

// P(Delta D = 1 | state) = 2(1-p) G(n-G)/(n(n-1)) + G(G-1)/(n(n-1)).
inline BigRat discard_prob_exact(const BigRat& p, const KernelState& st) {
    const BigRat denom(static_cast<long long>(st.n) * (st.n - 1));
    return (BigRat(2) * (BigRat(1) - p) * BigRat(st.g) * BigRat(st.n - st.g) +
            BigRat(st.g) * BigRat(st.g - 1)) /
           denom;
}

inline double discard_prob(double p, const KernelState& st) {
    return discard_prob_exact(BigRat(p), st).convert_to<double>();
}

}  // namespace frozen_er
