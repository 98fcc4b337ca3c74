#include <catch2/catch_amalgamated.hpp>

#include "frozen_er/experiments.hpp"

using namespace frozen_er;

static constexpr std::uint64_t kSeed = 777;

TEST_CASE("trajectory experiment tracks the fluid limit at small n") {
    const auto rep = trajectory_experiment(1.0, 4000, 8, 2.0, kSeed);
    CHECK(rep.pass);  // default tolerance 5 n^(-1/4)
    CHECK(rep.metrics["median_sup_dev_G"].get<double>() < 0.08);
    CHECK(rep.replica_rows.size() == 8);
    // zero horizon: no deviation anywhere
    const auto rep0 = trajectory_experiment(0.5, 500, 3, 0.0, kSeed);
    CHECK(rep0.metrics["median_sup_dev_G"].get<double>() == 0.0);
    CHECK(rep0.metrics["median_sup_dev_tree_spectrum"].get<double>() == 0.0);
}

TEST_CASE("gelation experiment standardizes to a Gumbel-like law") {
    const auto rep = gelation_experiment(1.0, 5000, 150, 1, kSeed);
    // finite-n: generous slack, but the standardized sample must be sane
    CHECK(rep.metrics["ks_statistic"].get<double>() < 0.25);
    const auto rep2 = gelation_experiment(0.5, 5000, 120, 2, kSeed + 1);
    CHECK(rep2.metrics["freq_a_kplus_equals_a_k"].get<double>() >= 0.8);
}

TEST_CASE("tree count at threshold is near Poisson") {
    const auto rep = tree_count_poisson_experiment(1.0, 20000, 1, 0.0, 500, kSeed);
    CHECK(rep.metrics["chi2_p_value"].get<double>() > 1e-3);
    CHECK(rep.metrics["lambda"].get<double>() == Catch::Approx(1.0).margin(1e-9));
    // k = 2, p = 1: lambda = 1/2
    const auto rep2 = tree_count_poisson_experiment(1.0, 20000, 2, 0.0, 300, kSeed);
    CHECK(rep2.metrics["lambda"].get<double>() == Catch::Approx(0.5).margin(1e-9));
    // p = 1/2, k = 1: lambda = e^-1
    const auto rep3 = tree_count_poisson_experiment(0.5, 20000, 1, 0.0, 300, kSeed);
    CHECK(rep3.metrics["lambda"].get<double>() ==
          Catch::Approx(std::exp(-1.0)).margin(1e-9));
}

TEST_CASE("largest tree scales like ln n") {
    const auto rep = largest_tree_experiment(0.5, 30000, 0.25, 20, kSeed);
    CHECK(rep.pass);
    CHECK_THROWS_AS(largest_tree_experiment(0.5, 1000, 0.52, 5, kSeed),
                    std::domain_error);
}

TEST_CASE("typical tree size law and entrance time") {
    const auto rep = typical_tree_experiment(0.5, 4000, 0.25, 1500, kSeed);
    CHECK(rep.metrics["chi2_p_value"].get<double>() > 1e-3);
    CHECK(rep.metrics["entrance_cdf_sup_dev"].get<double>() < 0.08);
}

TEST_CASE("pinned-component probability formula") {
    // k = 1: an isolated vertex; early time so both sides are order one
    const auto rep = pnk_formula_experiment(0.5, 100, 1, 1, 1.0, 20000, kSeed);
    CHECK(std::abs(rep.metrics["z_score"].get<double>()) <= 3.0);
    // both sides near e^-t for small t (gel is empty early on)
    CHECK(rep.metrics["rhs_formula"].get<double>() ==
          Catch::Approx(std::exp(-1.0)).epsilon(0.05));
    // t = 0: survival is certain
    const auto rep0 = pnk_formula_experiment(0.5, 60, 1, 1, 0.0, 200, kSeed);
    CHECK(rep0.metrics["lhs_monte_carlo"].get<double>() == 1.0);
    CHECK(rep0.metrics["rhs_formula"].get<double>() == Catch::Approx(1.0).margin(1e-12));
    // k = 2 at a later time
    const auto rep2 = pnk_formula_experiment(0.5, 100, 2, 1, 2.0, 40000, kSeed);
    CHECK(std::abs(rep2.metrics["z_score"].get<double>()) <= 3.0);
}

TEST_CASE("factorial moments against the partition formula") {
    // j = 1 reduces to the expectation identity
    const auto rep1 = factorial_moment_experiment(0.5, 40, 2, 1, 1.0, 30000, kSeed);
    CHECK(std::abs(rep1.metrics["z_score"].get<double>()) <= 3.0);
    const auto rep2 = factorial_moment_experiment(0.5, 40, 2, 2, 1.0, 30000, kSeed + 5);
    CHECK(std::abs(rep2.metrics["z_score"].get<double>()) <= 3.0);
    // j > n vanishes identically
    const auto repd = factorial_moment_experiment(0.5, 10, 2, 11, 1.0, 10, kSeed);
    CHECK(repd.pass);
}

TEST_CASE("expectation growth at foreign thresholds") {
    // k' = 1 at the k = 2 threshold grows like (n/ln n)^(1/2)
    const auto rep = expectation_bound_experiment(0.5, 2, 1, 0.0, 150, kSeed,
                                                  {2000, 8000, 32000});
    CHECK(rep.metrics["target_slope"].get<double>() == Catch::Approx(0.5));
    CHECK(std::abs(rep.metrics["fitted_slope"].get<double>() - 0.5) <= 0.3);
    // k' = 2k dies out
    const auto rep2 = expectation_bound_experiment(0.5, 1, 2, 0.0, 150, kSeed,
                                                   {2000, 8000, 32000});
    const auto means = rep2.metrics["means"].get<std::vector<double>>();
    CHECK(means.back() < 0.1);
}

TEST_CASE("gel tail bound in the continuous model") {
    const auto rep = gel_tail_experiment(1.0, 2000, 80, kSeed);
    CHECK(rep.pass);
    const auto rep2 = gel_tail_experiment(0.3, 2000, 80, kSeed);
    CHECK(rep2.pass);
}

TEST_CASE("Poissonized and discrete models agree in law") {
    const auto rep = poissonization_agreement_experiment(0.5, 2000, 1.5, 1200, kSeed);
    CHECK(rep.metrics["ks_p_value"].get<double>() > 1e-3);
}

TEST_CASE("report serialization") {
    auto rep = trajectory_experiment(0.5, 500, 3, 1.0, kSeed);
    rep.write_files("/tmp/frozen_er_test_reports");
    const auto j = rep.to_json();
    CHECK(j.contains("metrics"));
    CHECK(j["replicas"].get<std::size_t>() == 3);
    std::ifstream in("/tmp/frozen_er_test_reports/" + rep.name + ".json");
    CHECK(in.good());
}
