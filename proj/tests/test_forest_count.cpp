#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "frozen_er/forest_count.hpp"
#include "frozen_er/union_find.hpp"

using namespace frozen_er;

namespace {

// brute force: count acyclic edge-subsets of size M on N labeled vertices
long brute_force_count(int N, int M) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b) edges.emplace_back(a, b);
    long count = 0;
    std::vector<int> pick(M);
    const std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == M) {
            UnionFind uf(N);
            for (int i = 0; i < M; ++i) {
                const auto [a, b] = edges[pick[i]];
                const auto ra = uf.find(a), rb = uf.find(b);
                if (ra == rb) return;
                uf.unite_roots(ra, rb);
            }
            ++count;
            return;
        }
        for (int i = start; i < static_cast<int>(edges.size()); ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return count;
}

}  // namespace

TEST_CASE("exact forest counts") {
    const ForestCountTable table(40);
    CHECK(table.count(4, 3) == 16);
    CHECK(table.count(4, 2) == 15);
    CHECK(table.count(5, 3) == 110);
    for (long N = 1; N <= 10; ++N) CHECK(table.count(N, 0) == 1);
    for (long N = 2; N <= 12; ++N) CHECK(table.count(N, N - 1) == cayley_count(N));
    // conventions used by the transition kernel
    CHECK(table.count(0, 0) == 1);
    CHECK(table.count(3, 3) == 0);
    CHECK(table.count(-1, 0) == 0);
    CHECK(table.count(5, 7) == 0);
    // brute force cross-check on everything enumerable in a blink
    for (int N = 2; N <= 7; ++N)
        for (int M = 0; M <= N - 1; ++M)
            CHECK(table.count(N, M) == brute_force_count(N, M));
}

TEST_CASE("random-walk count identity") {
    const ForestCountTable table(32);
    for (double theta : {0.3, 0.6, 1.0}) {
        CHECK(count_identity_deviation(table, 6, 3, theta) < 1e-8);
        CHECK(count_identity_deviation(table, 12, 7, theta) < 1e-8);
        CHECK(count_identity_deviation(table, 30, 17, theta) < 1e-8);
    }
    // single-component row reduces to the Cayley count
    CHECK(count_identity_deviation(table, 9, 8, 0.7) < 1e-8);
}

TEST_CASE("asymptotic count estimates") {
    const ForestCountTable table(300);
    {
        const auto est = britikov_asymptotic(300, 60);
        CHECK(est.regime == ForestRegime::Subcritical);
        CHECK(est.omega < -1.0);
        CHECK(std::abs(est.log_estimate - table.log_count(300, 60)) <
              0.05 * table.log_count(300, 60));
    }
    {
        const auto est = britikov_asymptotic(300, 150);
        CHECK(est.regime == ForestRegime::NearCritical);
        CHECK(est.omega == Catch::Approx(0.0).margin(1e-12));
        CHECK(std::abs(est.log_estimate - table.log_count(300, 150)) <
              0.10 * table.log_count(300, 150));
    }
    {
        const auto est = britikov_asymptotic(300, 230);
        CHECK(est.regime == ForestRegime::Supercritical);
        CHECK(est.omega > 1.0);
        CHECK(std::abs(est.log_estimate - table.log_count(300, 230)) <
              0.10 * table.log_count(300, 230));
    }
    // both regimes reported inside the overlap band
    const auto overlap = britikov_asymptotic(300, 170);
    CHECK(overlap.log_alternative.has_value());
    CHECK(!britikov_asymptotic(300, 150).log_alternative.has_value());
}

TEST_CASE("one-step freeze kernel") {
    const ForestCountTable table(16);
    // a size-2 tree among two singletons freezes only through its own pair
    CHECK(gel_jump_pmf(table, 0.5, KernelState(4, 4, 1, 0), 2) ==
          Catch::Approx(1.0 / 6.0).margin(1e-15));
    // without gel the k = 1 mass vanishes and empty forests cannot jump
    for (double p : {0.2, 0.9}) {
        CHECK(gel_jump_pmf(table, p, KernelState(6, 6, 2, 0), 1) == 0.0);
        for (long k = 1; k <= 1; ++k)
            CHECK(gel_jump_pmf(table, p, KernelState(6, 6, 0, 0), k) == 0.0);
    }
    CHECK(gel_jump_pmf(table, 0.5, KernelState(6, 4, 2, 2), 4) == 0.0);  // k > e+1

    // discard probability
    CHECK(discard_prob(0.7, KernelState(5, 5, 2, 0)) == 0.0);
    CHECK(discard_prob(0.3, KernelState(5, 0, 0, 5)) == Catch::Approx(1.0).margin(1e-15));
    CHECK(discard_prob(0.5, KernelState(4, 2, 0, 2)) == Catch::Approx(0.5).margin(1e-15));

    // kernel normalization: the non-jump mass must be a probability
    for (long n : {5L, 8L}) {
        for (long v = 1; v <= n; ++v) {
            for (long e = 0; e <= v - 1; ++e) {
                const KernelState st(n, v, e, n - v);
                BigRat total = discard_prob_exact(BigRat(1, 2), st);
                for (long k = 1; k <= e + 1; ++k)
                    total += gel_jump_pmf_exact(table, BigRat(1, 2), st, k);
                CHECK(total <= 1);
                CHECK(total >= 0);
            }
        }
    }
}
