#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "frozen_er/forest_sampler.hpp"
#include "frozen_er/stats.hpp"
#include "frozen_er/union_find.hpp"

using namespace frozen_er;

namespace {

void check_forest_valid(const Forest& f, long N, long M) {
    REQUIRE(f.n_vertices == N);
    REQUIRE(static_cast<long>(f.edges.size()) == M);
    UnionFind uf(static_cast<std::uint32_t>(N));
    for (auto [a, b] : f.edges) {
        const auto ra = uf.find(a - 1), rb = uf.find(b - 1);
        REQUIRE(ra != rb);  // acyclic
        uf.unite_roots(ra, rb);
    }
    long covered = 0;
    for (const auto& comp : f.components) {
        covered += static_cast<long>(comp.size());
        const auto root = uf.find(comp.front() - 1);
        for (int v : comp) REQUIRE(uf.find(v - 1) == root);
        REQUIRE(uf.size_of_root(root) == comp.size());
    }
    REQUIRE(covered == N);
}

}  // namespace

TEST_CASE("component size sampler, forced cases") {
    Xoshiro256 rng(11);
    {
        ComponentSizeSampler s(7, 6);
        const auto sizes = s.sample(rng);
        REQUIRE(sizes.size() == 1);
        CHECK(sizes[0] == 7);
    }
    {
        ComponentSizeSampler s(6, 0);
        const auto sizes = s.sample(rng);
        REQUIRE(sizes.size() == 6);
        for (long v : sizes) CHECK(v == 1);
    }
}

TEST_CASE("component sizes of W(4,2): 12/15 split vs 3/15") {
    Xoshiro256 rng(101);
    ComponentSizeSampler s(4, 2);
    const long trials = 100000;
    long split31 = 0;
    for (long i = 0; i < trials; ++i) {
        auto sizes = s.sample(rng);
        std::sort(sizes.begin(), sizes.end());
        if (sizes == std::vector<long>{1, 3}) ++split31;
    }
    const double phat = split31 / static_cast<double>(trials);
    const double truth = 12.0 / 15.0;
    const double sigma = std::sqrt(truth * (1.0 - truth) / trials);
    CHECK(std::abs(phat - truth) <= 3.0 * sigma);
}

TEST_CASE("uniform Cayley trees") {
    Xoshiro256 rng(7);
    CHECK(sample_cayley_tree({4}, rng).empty());
    CHECK(sample_cayley_tree({4, 9}, rng) ==
          std::vector<std::pair<int, int>>{{4, 9}});
    {   // k = 3: each of the three paths with frequency 1/3
        std::map<int, long> center_count;
        const long trials = 100000;
        for (long i = 0; i < trials; ++i) {
            const auto t = sample_cayley_tree({1, 2, 3}, rng);
            const int deg2 = t[0].first == t[1].first || t[0].first == t[1].second
                                 ? t[0].first
                                 : t[0].second;
            ++center_count[deg2];
        }
        const double sigma = std::sqrt((1.0 / 3) * (2.0 / 3) * trials);
        for (auto [c, count] : center_count)
            CHECK(std::abs(count - trials / 3.0) <= 3.0 * sigma);
    }
    {   // k = 4: all 16 trees uniform (chi-square)
        std::map<std::vector<std::pair<int, int>>, long> counts;
        const long trials = 300000;
        for (long i = 0; i < trials; ++i) {
            auto t = sample_cayley_tree({1, 2, 3, 4}, rng);
            for (auto& [a, b] : t)
                if (a > b) std::swap(a, b);
            std::sort(t.begin(), t.end());
            ++counts[t];
        }
        REQUIRE(counts.size() == 16);
        std::vector<double> obs, exp;
        for (const auto& [tree, c] : counts) {
            obs.push_back(static_cast<double>(c));
            exp.push_back(trials / 16.0);
        }
        CHECK(chi_square_test(obs, exp).p_value > 1e-3);
    }
}

TEST_CASE("uniform forests") {
    Xoshiro256 rng(23);
    {   // W(3,2) is the set of the three labeled trees
        std::map<std::vector<std::pair<int, int>>, long> counts;
        const long trials = 60000;
        ForestSampler sampler(3, 2);
        for (long i = 0; i < trials; ++i) {
            auto f = sampler.sample(rng);
            check_forest_valid(f, 3, 2);
            auto key = f.edges;
            for (auto& [a, b] : key)
                if (a > b) std::swap(a, b);
            std::sort(key.begin(), key.end());
            ++counts[key];
        }
        REQUIRE(counts.size() == 3);
        for (const auto& [k, c] : counts)
            CHECK(std::abs(c - trials / 3.0) <=
                  3.0 * std::sqrt(trials * (1.0 / 3) * (2.0 / 3)));
    }
    {   // structural validity across a spread of (N, M)
        for (auto [N, M] : {std::pair<long, long>{10, 0}, {10, 9}, {12, 5}, {40, 25}}) {
            ForestSampler sampler(N, M);
            for (int i = 0; i < 50; ++i) check_forest_valid(sampler.sample(rng), N, M);
        }
    }
}

TEST_CASE("largest component concentration in the subcritical regime") {
    // L1(N, cN)/ln(N) -> 1/(2c - 1 - ln 2c) at c = 0.3
    const long N = 2000, M = 600;
    const double c = static_cast<double>(M) / N;
    const double constant = 1.0 / (2.0 * c - 1.0 - std::log(2.0 * c));
    Xoshiro256 rng(37);
    ComponentSizeSampler sampler(N, M);
    std::vector<double> scaled;
    for (int r = 0; r < 400; ++r) {
        const auto sizes = sampler.sample(rng);
        scaled.push_back(*std::max_element(sizes.begin(), sizes.end()) /
                         std::log(static_cast<double>(N)));
    }
    CHECK(std::abs(median(scaled) / constant - 1.0) <= 0.25);
}

TEST_CASE("tilt invariance of the conditioned size law") {
    // the sampled law cannot depend on the tilt parameter
    const long N = 200, M = 60, samples = 100000;
    std::vector<double> l1_default, l1_half;
    {
        Xoshiro256 rng(41);
        ComponentSizeSampler s(N, M);  // theta = 2M/N = 0.6
        for (long i = 0; i < samples; ++i) {
            const auto sizes = s.sample(rng);
            l1_default.push_back(
                static_cast<double>(*std::max_element(sizes.begin(), sizes.end())));
        }
    }
    {
        Xoshiro256 rng(43);
        ComponentSizeSampler s(N, M, 0.5);
        for (long i = 0; i < samples; ++i) {
            const auto sizes = s.sample(rng);
            l1_half.push_back(
                static_cast<double>(*std::max_element(sizes.begin(), sizes.end())));
        }
    }
    CHECK(ks_two_sample(l1_default, l1_half).p_value > 1e-3);
}
