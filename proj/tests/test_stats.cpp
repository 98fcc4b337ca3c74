#include <catch2/catch_amalgamated.hpp>

#include "frozen_er/rng.hpp"
#include "frozen_er/stats.hpp"

using namespace frozen_er;

TEST_CASE("summaries") {
    std::vector<double> xs = {1.0, 2.0, 3.0, 4.0, 10.0};
    CHECK(mean(xs) == Catch::Approx(4.0));
    CHECK(median(xs) == Catch::Approx(3.0));
    CHECK(variance(xs) == Catch::Approx(12.5));
    std::vector<double> even = {1.0, 2.0, 3.0, 8.0};
    CHECK(median(even) == Catch::Approx(2.5));
}

TEST_CASE("incomplete gamma and chi-square tails") {
    // chi2(1) upper tail at classic critical values
    CHECK(chi2_pvalue(3.841458820694124, 1.0) == Catch::Approx(0.05).margin(1e-6));
    CHECK(chi2_pvalue(6.634896601021214, 1.0) == Catch::Approx(0.01).margin(1e-6));
    // chi2(2) is exponential(1/2)
    for (double x : {0.5, 2.0, 7.0})
        CHECK(chi2_pvalue(x, 2.0) == Catch::Approx(std::exp(-0.5 * x)).epsilon(1e-10));
    CHECK(gamma_q(3.0, 0.0) == 1.0);
}

TEST_CASE("KS against a known distribution") {
    // uniform(0,1) samples against the uniform CDF: p-value is healthy, and
    // against a wrong CDF it collapses
    Xoshiro256 rng(109);
    std::vector<double> u(4000);
    for (auto& x : u) x = rng.uniform01();
    const auto ok = ks_test(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(ok.p_value > 1e-3);
    const auto bad = ks_test(u, [](double x) { return std::clamp(x * x, 0.0, 1.0); });
    CHECK(bad.p_value < 1e-9);

    // hand-checked tiny sample: D for {0.1, 0.4, 0.9} vs uniform
    const auto tiny = ks_test({0.1, 0.4, 0.9}, [](double x) { return x; });
    CHECK(tiny.statistic == Catch::Approx(0.2666666667).margin(1e-9));
}

TEST_CASE("two-sample KS") {
    Xoshiro256 rng(211);
    std::vector<double> a(3000), b(3000), c(3000);
    for (auto& x : a) x = rng.uniform01();
    for (auto& x : b) x = rng.uniform01();
    for (auto& x : c) x = 0.8 * rng.uniform01();
    CHECK(ks_two_sample(a, b).p_value > 1e-3);
    CHECK(ks_two_sample(a, c).p_value < 1e-9);
}

TEST_CASE("KS critical value") {
    // Q(lambda = 1.9495) is about 0.1%; check the round trip
    const double crit = ks_critical_value(500, 1e-3);
    const double lambda = (std::sqrt(500.0) + 0.12 + 0.11 / std::sqrt(500.0)) * crit;
    CHECK(kolmogorov_q(lambda) == Catch::Approx(1e-3).epsilon(1e-6));
    CHECK(crit == Catch::Approx(0.0871).margin(0.001));
}

TEST_CASE("Gumbel and Poisson references") {
    CHECK(gumbel_cdf(0.0) == Catch::Approx(std::exp(-1.0)).margin(1e-15));
    CHECK(poisson_pmf(1.0, 0) == Catch::Approx(std::exp(-1.0)).margin(1e-15));
    CHECK(poisson_pmf(2.5, 3) ==
          Catch::Approx(std::exp(-2.5) * 2.5 * 2.5 * 2.5 / 6.0).margin(1e-12));
    CHECK(poisson_cdf(3.0, 1000) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("Poisson concentration bound") {
    // P(|Y - lambda| >= a) <= lambda/a^3 at a = lambda^0.8
    for (double lambda : {10.0, 1000.0}) {
        const double a = std::pow(lambda, 0.8);
        CHECK(poisson_two_sided_tail(lambda, a) <= lambda / (a * a * a));
    }
}

TEST_CASE("rng reproducibility and stream independence") {
    Xoshiro256 a(42), b(42), c(43);
    bool same = true, diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a(), vb = b(), vc = c();
        same = same && va == vb;
        diff = diff || va != vc;
    }
    CHECK(same);
    CHECK(diff);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    // below(n) stays in range and covers the range
    Xoshiro256 r(7);
    std::vector<long> seen(10, 0);
    for (int i = 0; i < 10000; ++i) ++seen[r.below(10)];
    for (long s : seen) CHECK(s > 800);
}
