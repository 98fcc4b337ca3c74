#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "frozen_er/forest_count.hpp"
#include "frozen_er/simulator.hpp"
#include "frozen_er/stats.hpp"

using namespace frozen_er;

TEST_CASE("two vertices: merge then freeze, always two steps") {
    // the only pair first joins the singletons, then rings inside the tree
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        GraphState st(2, 0.5);
        Xoshiro256 rng(seed);
        CHECK(st.step_discrete(rng) == StepOutcome::TreeMerge);
        CHECK(!st.fully_frozen());
        CHECK(st.step_discrete(rng) == StepOutcome::Freeze);
        CHECK(st.fully_frozen());
        CHECK(st.steps() == 2);
    }
    SimConfig cfg;
    cfg.n = 2;
    cfg.p = 0.5;
    cfg.seed = 99;
    const auto rec = run_simulation(cfg);
    CHECK(rec.absorption == 2.0);  // exact chain: deterministic absorption
}

TEST_CASE("counter invariants hold along a run") {
    GraphState st(300, 0.4);
    Xoshiro256 rng(5);
    std::vector<long> frozen_roots_sizes;
    long prev_g = 0, prev_d = 0;
    while (!st.fully_frozen()) {
        st.step_discrete(rng);
        st.check_invariants();
        CHECK(st.gel() >= prev_g);
        CHECK(st.discarded() >= prev_d);
        CHECK(st.gel() <= std::min(st.steps(), st.n()));
        prev_g = st.gel();
        prev_d = st.discarded();
    }
    CHECK(st.forest_vertices() == 0);
    CHECK(st.forest_edges() == 0);
    // absorbed state only discards
    for (int i = 0; i < 20; ++i) CHECK(st.step_discrete(rng) == StepOutcome::Discard);
}

TEST_CASE("freezing is irreversible") {
    GraphState st(60, 0.5);
    Xoshiro256 rng(8);
    std::map<long, bool> seen_frozen;
    for (int i = 0; i < 4000 && !st.fully_frozen(); ++i) {
        st.step_discrete(rng);
        for (long v = 1; v <= 60; ++v) {
            const bool f = st.component_of(v).second;
            if (seen_frozen[v]) CHECK(f);
            seen_frozen[v] = f;
        }
    }
}

TEST_CASE("single-step freeze probability from an injected state") {
    // one tree {1,2} plus two singletons on n = 4: P(freeze the pair) = 1/6
    Forest f;
    f.n_vertices = 4;
    f.edges = {{1, 2}};
    f.components = {{1, 2}, {3}, {4}};
    const long trials = 200000;
    long freezes = 0;
    Xoshiro256 rng(13);
    for (long i = 0; i < trials; ++i) {
        GraphState st(4, 0.5, f);
        const long before = st.gel();
        st.step_discrete(rng);
        if (st.gel() - before == 2) ++freezes;
    }
    const double sigma = std::sqrt((1.0 / 6) * (5.0 / 6) / trials);
    CHECK(std::abs(freezes / static_cast<double>(trials) - 1.0 / 6) <= 3.5 * sigma);
}

TEST_CASE("absorption bookkeeping") {
    SimConfig cfg;
    cfg.n = 400;
    cfg.p = 0.7;
    cfg.k_max = 4;
    cfg.seed = 21;
    const auto rec = run_simulation(cfg);
    CHECK(rec.complete);
    CHECK(rec.absorption == rec.last_tree_at_least[1]);  // A = A^(1+)
    for (long k = 1; k < 4; ++k)
        CHECK(rec.last_tree_at_least[k] >= rec.last_tree_at_least[k + 1]);
    for (long k = 1; k <= 4; ++k)
        CHECK(rec.last_tree_at_least[k] >= rec.last_tree_of_size[k]);
    // trajectory grid is populated and increasing
    REQUIRE(rec.trajectory.size() == static_cast<std::size_t>(cfg.grid_points));
    for (std::size_t i = 1; i < rec.trajectory.size(); ++i)
        CHECK(rec.trajectory[i].at > rec.trajectory[i - 1].at);
}

TEST_CASE("Poissonized clock") {
    const long n = 500;
    GraphState st(n, 0.5);
    Xoshiro256 rng(17);
    st.step_poissonized(rng);
    CHECK(st.time() > 0.0);
    // mean time to first ring is 2/(n-1)
    std::vector<double> first(4000);
    for (auto& t : first) {
        GraphState s2(n, 0.5);
        Xoshiro256 r2(rng());
        s2.step_poissonized(r2);
        t = s2.time();
    }
    const double m = mean(first);
    CHECK(std::abs(m - 2.0 / (n - 1)) <= 4.0 * standard_error(first));
}

TEST_CASE("strict Poissonized mode ignores rings on present edges") {
    SimConfig cfg;
    cfg.n = 30;
    cfg.p = 0.5;
    cfg.mode = SimMode::Poissonized;
    cfg.strict_ppp = true;
    cfg.seed = 3;
    const auto rec = run_simulation(cfg);
    CHECK(rec.complete);
    // strict mode must still absorb: freezes come from fresh in-tree pairs
    CHECK(rec.absorption > 0.0);

    GraphState st(10, 1.0, /*keep_edges=*/true);
    Xoshiro256 rng(4);
    long ignored = 0, applied = 0;
    while (!st.fully_frozen()) {
        (st.step_poissonized(rng, true) == StepOutcome::Ignored ? ignored : applied)++;
    }
    CHECK(applied == st.steps());
    CHECK(ignored > 0);  // re-rings do occur at this density
    st.check_invariants();
}

TEST_CASE("conditional one-step law matches the kernel formula") {
    // inject uniform forests at fixed (v, e), step once, compare Delta G
    // frequencies with the exact kernel (small chi-square, unit-test scale)
    const ForestCountTable table(8);
    const long n = 6, v = 5, e = 3, g = 1;
    const double p = 0.5;
    const KernelState ks(n, v, e, g);
    const ForestSampler sampler(v, e);
    Xoshiro256 rng(29);
    const long trials = 200000;
    std::vector<double> counts(e + 3, 0.0);
    for (long i = 0; i < trials; ++i) {
        Forest f = sampler.sample(rng);
        GraphState st(n, p, f);
        const long before = st.gel();
        st.step_discrete(rng);
        const long jump = st.gel() - before;
        counts[jump == 0 ? e + 2 : jump] += 1.0;
    }
    std::vector<double> obs, expv;
    double rest = static_cast<double>(trials);
    for (long k = 1; k <= e + 1; ++k) {
        const double expected = trials * gel_jump_pmf(table, p, ks, k);
        obs.push_back(counts[k]);
        expv.push_back(expected);
        rest -= expected;
    }
    obs.push_back(counts[e + 2]);
    expv.push_back(rest);
    CHECK(chi_square_test(obs, expv).p_value > 1e-3);
}

TEST_CASE("free forest property at a stopped time") {
    // run n = 7 to m = 6, bin the forest conditional on (V, E) = (5, 3):
    // all 222 such forests with the two frozen vertices fixed must be
    // equally likely; pooled over the label choice of the frozen pair the
    // forest part restricted to its vertex set is uniform
    const long n = 7, m_stop = 6;
    const double p = 0.5;
    Xoshiro256 rng(31);
    std::map<std::vector<std::pair<int, int>>, long> counts;
    long hits = 0;
    for (long trial = 0; trial < 400000; ++trial) {
        GraphState st(n, p, /*keep_edges=*/true);
        while (st.steps() < m_stop) st.step_discrete(rng);
        if (st.forest_vertices() != 5 || st.forest_edges() != 3) continue;
        ++hits;
        // canonical key: edges among unfrozen vertices, relabeled 1..5
        std::vector<int> forest_vertices;
        for (long vv = 1; vv <= n; ++vv)
            if (!st.component_of(vv).second) forest_vertices.push_back(static_cast<int>(vv));
        std::map<int, int> relabel;
        for (std::size_t i = 0; i < forest_vertices.size(); ++i)
            relabel[forest_vertices[i]] = static_cast<int>(i + 1);
        std::vector<std::pair<int, int>> key;
        for (int a : forest_vertices)
            for (int b : forest_vertices)
                if (a < b && st.has_edge(a, b)) key.emplace_back(relabel[a], relabel[b]);
        std::sort(key.begin(), key.end());
        ++counts[key];
    }
    REQUIRE(hits > 50000);
    REQUIRE(counts.size() == 110);  // #W(5,3)
    std::vector<double> obs, expv(110, hits / 110.0);
    for (const auto& [k, c] : counts) obs.push_back(static_cast<double>(c));
    CHECK(chi_square_test(obs, expv).p_value > 1e-3);
}
