#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "frozen_er/experiments.hpp"
#include "frozen_er/forest_count.hpp"
#include "frozen_er/forest_sampler.hpp"

namespace frozen_er {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace verify_detail {

inline BigRat rat_pow(long base, long exp) {
    if (exp >= 0) return BigRat(boost::multiprecision::pow(BigInt(base),
                                                           static_cast<unsigned>(exp)));
    return BigRat(1) / BigRat(boost::multiprecision::pow(
                           BigInt(base), static_cast<unsigned>(-exp)));
}

// All labeled forests on v vertices with e edges, enumerated by brute force
// over edge subsets. Acts as the independent oracle for sampler uniformity
// and kernel exactness.
struct ForestEnumeration {
    std::vector<std::vector<std::pair<int, int>>> forests;  // 1-based edges
    std::map<std::vector<std::pair<int, int>>, std::size_t> index;

    ForestEnumeration(int v, int e) {
        std::vector<std::pair<int, int>> all_edges;
        for (int a = 1; a <= v; ++a)
            for (int b = a + 1; b <= v; ++b) all_edges.emplace_back(a, b);
        const int total = static_cast<int>(all_edges.size());
        std::vector<int> pick(e);
        const std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == e) {
                UnionFind uf(v);
                for (int i = 0; i < e; ++i) {
                    const auto [a, b] = all_edges[pick[i]];
                    const auto ra = uf.find(a - 1), rb = uf.find(b - 1);
                    if (ra == rb) return;  // cycle
                    uf.unite_roots(ra, rb);
                }
                std::vector<std::pair<int, int>> edges;
                for (int i = 0; i < e; ++i) edges.push_back(all_edges[pick[i]]);
                index[edges] = forests.size();
                forests.push_back(std::move(edges));
                return;
            }
            for (int i = start; i < total; ++i) {
                pick[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }

    std::size_t lookup(const Forest& f) const {
        std::vector<std::pair<int, int>> edges;
        for (auto [a, b] : f.edges) edges.emplace_back(std::min(a, b), std::max(a, b));
        std::sort(edges.begin(), edges.end());
        const auto it = index.find(edges);
        if (it == index.end()) throw std::logic_error("sampled forest not in enumeration");
        return it->second;
    }

    // component size counts per forest, for the one-step kernel oracle
    std::vector<long> size_census(int v, std::size_t fi) const {
        UnionFind uf(v);
        for (auto [a, b] : forests[fi]) uf.unite_roots(uf.find(a - 1), uf.find(b - 1));
        std::vector<long> census(v + 1, 0);
        for (int x = 0; x < v; ++x)
            if (uf.find(x) == static_cast<std::uint32_t>(x)) ++census[uf.size_of_root(x)];
        return census;
    }
};

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

}  // namespace verify_detail

// --- criterion 1: exact identities ---
inline CriterionResult criterion_exact_identities(const ForestCountTable& table) {
    using verify_detail::rat_pow;
    detail::Stopwatch clock;
    CriterionResult res{1, "exact identities", true, "", 0.0};
    std::ostringstream why;

    // Borel convolution identity, exact rationals, k <= 60
    for (long k = 2; k <= 60 && res.pass; ++k) {
        const BigRat lhs = BigRat(2) * rat_pow(k, k - 3) / BigRat(big_factorial(k - 2));
        BigRat rhs = 0;
        for (long i = 1; i <= k - 1; ++i)
            rhs += rat_pow(i, i - 2) / BigRat(big_factorial(i - 1)) *
                   rat_pow(k - i, k - i - 2) / BigRat(big_factorial(k - i - 1));
        if (lhs != rhs) {
            res.pass = false;
            why << "convolution identity fails at k=" << k << "; ";
        }
    }
    // T(theta e^-theta) closed form
    for (int i = 1; i <= 10; ++i) {
        const double theta = 0.1 * i;
        const double err =
            std::abs(tree_fn(theta * std::exp(-theta)) - theta * (1.0 - 0.5 * theta));
        if (err > 1e-10) {
            res.pass = false;
            why << "tree function mismatch at theta=" << theta << " err=" << err << "; ";
        }
    }
    // digamma anchors
    if (std::abs(digamma(1.0) + kEulerGamma) > 1e-10 ||
        std::abs(digamma(2.0) + kEulerGamma - 1.0) > 1e-10) {
        res.pass = false;
        why << "digamma anchors; ";
    }
    // forest counts: W(4,2) and Cayley diagonal
    if (table.count(4, 2) != 15) {
        res.pass = false;
        why << "W(4,2) != 15; ";
    }
    for (long N = 2; N <= 12; ++N) {
        if (table.count(N, N - 1) != cayley_count(N)) {
            res.pass = false;
            why << "Cayley diagonal fails at N=" << N << "; ";
        }
    }
    // walk identity, all N <= 30, all M, three tilts
    double worst = 0.0;
    for (long N = 2; N <= 30; ++N)
        for (long M = 0; M <= N - 1; ++M)
            for (double theta : {0.3, 0.6, 1.0})
                worst = std::max(worst, count_identity_deviation(table, N, M, theta));
    if (worst > 1e-8) {
        res.pass = false;
        why << "walk identity deviation " << worst << "; ";
    }
    res.detail = res.pass ? "worst walk-identity deviation " + verify_detail::fmt(worst)
                          : why.str();
    res.seconds = clock.seconds();
    return res;
}

// --- criterion 2: fluid-limit numerics ---
inline CriterionResult criterion_fluid_numerics() {
    detail::Stopwatch clock;
    CriterionResult res{2, "fluid-limit numerics", true, "", 0.0};
    std::ostringstream why;
    double worst_resid = 0.0;
    for (double p : {0.3, 0.5, 1.0}) {
        const GelCurve curve(p);
        for (double t = 0.51; t <= 5.0; t += 0.25) {
            const auto r = ode_residuals(curve, t);
            const double m = std::max({r.gel, r.discard, r.tree_system});
            worst_resid = std::max(worst_resid, m);
            if (m > 1e-5) {
                res.pass = false;
                why << "ODE residual " << m << " at p=" << p << " t=" << t << "; ";
            }
        }
        // right derivative at the critical point
        const double h = 1e-4;
        const double deriv = curve.mass(0.5 + h) / h;
        if (std::abs(deriv / (2.0 * (1.0 + p)) - 1.0) > 0.01) {
            res.pass = false;
            why << "right derivative off at p=" << p << "; ";
        }
    }
    {  // fixed-point oracle for the classical supercritical mass at t=1
        double x = 0.5;
        for (int i = 0; i < 200; ++i) x = 1.0 - std::exp(-2.0 * x);
        const GelCurve curve(1.0);
        if (std::abs(curve.mass(1.0) - x) > 1e-8) {
            res.pass = false;
            why << "fixed-point mismatch at p=1, t=1; ";
        }
    }
    for (double p : {0.25, 0.5, 0.75}) {
        const auto ii = gel_integral_identity(p);
        if (std::abs(ii.lhs - ii.rhs) > 1e-5) {
            res.pass = false;
            why << "integral identity off at p=" << p << " (" << ii.lhs - ii.rhs << "); ";
        }
    }
    res.detail = res.pass ? "worst ODE residual " + verify_detail::fmt(worst_resid)
                          : why.str();
    res.seconds = clock.seconds();
    return res;
}

// --- criterion 3: one-step kernel exactness ---
inline CriterionResult criterion_kernel_exactness(const ForestCountTable& table,
                                                  std::uint64_t seed,
                                                  bool with_simulation,
                                                  long draws_per_state = 1000000) {
    detail::Stopwatch clock;
    CriterionResult res{3, "one-step kernel exactness", true, "", 0.0};
    std::ostringstream why;
    const BigRat p_exact(1, 2);
    const double p = 0.5;
    BigRat worst_tv = 0;
    double worst_chi_p = 1.0;

    for (long n = 2; n <= 8; ++n) {
        for (long v = 1; v <= n; ++v) {
            for (long e = 0; e <= v - 1; ++e) {
                const long g = n - v;
                const KernelState state(n, v, e, g);
                const verify_detail::ForestEnumeration enumer(static_cast<int>(v),
                                                              static_cast<int>(e));
                // census totals: number of (forest, size-k component) pairs
                std::vector<long> totals(v + 1, 0);
                for (std::size_t fi = 0; fi < enumer.forests.size(); ++fi) {
                    const auto census = enumer.size_census(static_cast<int>(v), fi);
                    for (long k = 1; k <= v; ++k) totals[k] += census[k];
                }
                const BigInt w_count = table.count(v, e);
                const BigRat denom = BigRat(w_count) *
                                     BigRat(static_cast<long long>(n) * (n - 1));
                // exact one-step law from the enumeration
                BigRat tv = 0;
                for (long k = 1; k <= e + 1; ++k) {
                    const BigRat brute =
                        BigRat(totals[k]) *
                        (BigRat(k * (k - 1)) + BigRat(2 * k * g) * p_exact) / denom;
                    const BigRat formula = gel_jump_pmf_exact(table, p_exact, state, k);
                    tv += boost::multiprecision::abs(brute - formula);
                }
                tv /= 2;
                if (tv > worst_tv) worst_tv = tv;
                if (tv > BigRat(1, 1000000000000LL)) {
                    res.pass = false;
                    why << "TV(" << n << "," << v << "," << e << ") nonzero; ";
                }

                if (!with_simulation || e + 1 < 1) continue;
                // simulated one-step frequencies vs the formula
                std::vector<double> probs(e + 3, 0.0);  // index k, plus "no jump"
                double mass = 0.0;
                for (long k = 1; k <= e + 1; ++k) {
                    probs[k] = gel_jump_pmf(table, p, state, k);
                    mass += probs[k];
                }
                probs[e + 2] = 1.0 - mass;  // Delta G = 0
                std::vector<double> counts(e + 3, 0.0);
                const ForestSampler sampler(v, e);
                std::vector<long> chunk_counts((e + 3) * 4, 0L);
                parallel_replicas(4, [&](std::size_t w) {
                    Xoshiro256 rng(derive_seed(seed ^ (n * 100 + v * 10 + e), w));
                    const long draws = draws_per_state / 4;
                    for (long d = 0; d < draws; ++d) {
                        Forest f = sampler.sample(rng);
                        GraphState st(n, p, f);
                        const long before = st.gel();
                        st.step_discrete(rng);
                        const long jump = st.gel() - before;
                        ++chunk_counts[w * (e + 3) + (jump == 0 ? e + 2 : jump)];
                    }
                });
                for (std::size_t w = 0; w < 4; ++w)
                    for (long i = 0; i < e + 3; ++i) counts[i] += chunk_counts[w * (e + 3) + i];
                const double total_draws = 4.0 * (draws_per_state / 4);
                // bins with expected count below ~10 are pooled
                std::vector<double> obs, exp;
                double pooled_obs = 0.0, pooled_exp = 0.0;
                for (long i = 1; i < e + 3; ++i) {
                    const double expected = probs[i] * total_draws;
                    if (expected >= 10.0) {
                        obs.push_back(counts[i]);
                        exp.push_back(expected);
                    } else {
                        pooled_obs += counts[i];
                        pooled_exp += expected;
                    }
                }
                if (pooled_exp > 0.0) {
                    obs.push_back(pooled_obs);
                    exp.push_back(pooled_exp);
                }
                if (exp.size() >= 2) {
                    const auto chi = chi_square_test(obs, exp);
                    worst_chi_p = std::min(worst_chi_p, chi.p_value);
                    if (chi.p_value <= 1e-3) {
                        res.pass = false;
                        why << "chi2 p=" << chi.p_value << " at (" << n << "," << v << ","
                            << e << "); ";
                    }
                }
            }
        }
    }
    res.detail = res.pass ? (with_simulation
                                 ? "exact TV zero; worst chi2 p " +
                                       verify_detail::fmt(worst_chi_p)
                                 : "exact TV zero (simulation skipped)")
                          : why.str();
    res.seconds = clock.seconds();
    return res;
}

// --- criterion 4: sampler uniformity ---
inline CriterionResult criterion_sampler_uniformity(std::uint64_t seed, long samples) {
    detail::Stopwatch clock;
    CriterionResult res{4, "forest sampler uniformity", true, "", 0.0};
    std::ostringstream why;
    double min_p = 1.0;
    for (auto [v, e] : {std::pair<int, int>{4, 2}, std::pair<int, int>{5, 3}}) {
        const verify_detail::ForestEnumeration enumer(v, e);
        const std::size_t bins = enumer.forests.size();
        const unsigned workers = worker_threads(8);
        std::vector<std::vector<double>> w_counts(workers,
                                                  std::vector<double>(bins, 0.0));
        const ForestSampler sampler(v, e);
        parallel_replicas(workers, [&](std::size_t w) {
            Xoshiro256 rng(derive_seed(seed ^ (v * 16 + e), w));
            const long share = samples / workers;
            for (long s = 0; s < share; ++s)
                w_counts[w][enumer.lookup(sampler.sample(rng))] += 1.0;
        });
        std::vector<double> observed(bins, 0.0);
        double total = 0.0;
        for (const auto& wc : w_counts)
            for (std::size_t b = 0; b < bins; ++b) {
                observed[b] += wc[b];
                total += wc[b];
            }
        std::vector<double> expected(bins, total / bins);
        const auto chi = chi_square_test(observed, expected);
        min_p = std::min(min_p, chi.p_value);
        if (chi.p_value <= 1e-3) {
            res.pass = false;
            why << "chi2 p=" << chi.p_value << " over W(" << v << "," << e << "); ";
        }
    }
    res.detail = res.pass ? "min chi2 p " + verify_detail::fmt(min_p) : why.str();
    res.seconds = clock.seconds();
    return res;
}

// --- criterion 9: asymptotic count regimes ---
inline CriterionResult criterion_britikov(const ForestCountTable& table) {
    detail::Stopwatch clock;
    CriterionResult res{9, "asymptotic forest-count regimes", true, "", 0.0};
    std::ostringstream why, detail_ok;
    const long N = 300;
    const struct {
        long M;
        ForestRegime regime;
        double tol;
    } cases[] = {{60, ForestRegime::Subcritical, 0.05},
                 {150, ForestRegime::NearCritical, 0.10},
                 {230, ForestRegime::Supercritical, 0.10}};
    for (const auto& c : cases) {
        const auto est = britikov_asymptotic(N, c.M);
        const double exact = table.log_count(N, c.M);
        const double rel = std::abs(est.log_estimate - exact) / std::abs(exact);
        detail_ok << "M=" << c.M << " rel " << verify_detail::fmt(rel) << " ";
        if (est.regime != c.regime || rel > c.tol) {
            res.pass = false;
            why << "regime/estimate off at M=" << c.M << " rel=" << rel << "; ";
        }
    }
    res.detail = res.pass ? detail_ok.str() : why.str();
    res.seconds = clock.seconds();
    return res;
}

struct AcceptanceOptions {
    bool quick = false;
    std::uint64_t seed = 20240901;
};

// The full acceptance battery. Quick mode keeps the exact small-instance
// checks and trims the Monte Carlo load.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
    std::vector<CriterionResult> out;
    const ForestCountTable table(300);

    out.push_back(criterion_exact_identities(table));
    out.push_back(criterion_fluid_numerics());
    out.push_back(criterion_kernel_exactness(table, opt.seed, !opt.quick,
                                             opt.quick ? 100000 : 1000000));
    out.push_back(criterion_sampler_uniformity(opt.seed, opt.quick ? 30000 : 300000));

    {  // 5: trajectory fluid limit
        detail::Stopwatch clock;
        CriterionResult r{5, "trajectory fluid limit", true, "", 0.0};
        const long n = opt.quick ? 20000 : 100000;
        const long replicas = opt.quick ? 6 : 20;
        std::ostringstream d;
        for (double p : {0.5, 1.0}) {
            const auto rep =
                trajectory_experiment(p, n, replicas, 3.0, opt.seed, 10, 0.02, 0.05);
            r.pass = r.pass && rep.pass;
            d << "p=" << p << " devG " << verify_detail::fmt(
                     rep.metrics["median_sup_dev_G"].get<double>())
              << " trees " << verify_detail::fmt(
                     rep.metrics["median_sup_dev_tree_spectrum"].get<double>())
              << "  ";
        }
        r.detail = d.str();
        r.seconds = clock.seconds();
        out.push_back(r);
    }
    {  // 6: gelation Gumbel law
        detail::Stopwatch clock;
        CriterionResult r{6, "gelation Gumbel law", true, "", 0.0};
        const long n = opt.quick ? 20000 : 100000;
        const long replicas = opt.quick ? 120 : 500;
        std::ostringstream d;
        const std::pair<double, long> cases[] = {{1.0, 1}, {0.5, 1}, {0.5, 2}};
        for (auto [p, k] : cases) {
            const auto rep = gelation_experiment(p, n, replicas, k, opt.seed);
            r.pass = r.pass && rep.pass;
            d << "(p=" << p << ",k=" << k << ") KS "
              << verify_detail::fmt(rep.metrics["ks_statistic"].get<double>());
            if (k >= 2)
                d << " eq-freq "
                  << verify_detail::fmt(
                         rep.metrics["freq_a_kplus_equals_a_k"].get<double>());
            d << "  ";
        }
        r.detail = d.str();
        r.seconds = clock.seconds();
        out.push_back(r);
    }
    {  // 7: Poisson limit at the threshold
        detail::Stopwatch clock;
        CriterionResult r{7, "Poisson limit at threshold", true, "", 0.0};
        const long n = opt.quick ? 20000 : 100000;
        const long replicas = opt.quick ? 400 : 2000;
        std::ostringstream d;
        for (double p : {0.5, 1.0}) {
            const auto rep = tree_count_poisson_experiment(p, n, 1, 0.0, replicas, opt.seed);
            r.pass = r.pass && rep.pass;
            d << "p=" << p << " chi2-p "
              << verify_detail::fmt(rep.metrics["chi2_p_value"].get<double>()) << " mean "
              << verify_detail::fmt(rep.metrics["empirical_mean"].get<double>()) << "/"
              << verify_detail::fmt(rep.metrics["lambda"].get<double>()) << "  ";
        }
        r.detail = d.str();
        r.seconds = clock.seconds();
        out.push_back(r);
    }
    {  // 8: largest-tree law
        detail::Stopwatch clock;
        CriterionResult r{8, "largest-tree law", true, "", 0.0};
        const long n = opt.quick ? 20000 : 100000;
        const long replicas = opt.quick ? 20 : 50;
        std::ostringstream d;
        for (double t : {0.25, 1.5}) {
            const auto rep = largest_tree_experiment(0.5, n, t, replicas, opt.seed);
            r.pass = r.pass && rep.pass;
            d << "t=" << t << " rel-dev "
              << verify_detail::fmt(rep.metrics["relative_deviation"].get<double>())
              << "  ";
        }
        r.detail = d.str();
        r.seconds = clock.seconds();
        out.push_back(r);
    }
    out.push_back(criterion_britikov(table));
    {  // 10: gel tail bound
        detail::Stopwatch clock;
        CriterionResult r{10, "gel tail bound", true, "", 0.0};
        const long n = opt.quick ? 2000 : 10000;
        const long replicas = opt.quick ? 60 : 200;
        std::ostringstream d;
        for (double p : {0.3, 1.0}) {
            const auto rep = gel_tail_experiment(p, n, replicas, opt.seed);
            r.pass = r.pass && rep.pass;
            d << "p=" << p << (rep.pass ? " ok  " : " violated  ");
        }
        r.detail = d.str();
        r.seconds = clock.seconds();
        out.push_back(r);
    }
    return out;
}

}  // namespace frozen_er
