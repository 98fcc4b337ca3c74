#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "frozen_er/forest_sampler.hpp"
#include "frozen_er/rng.hpp"
#include "frozen_er/union_find.hpp"

namespace frozen_er {

enum class StepOutcome : std::uint8_t {
    TreeMerge,   // edge between two distinct trees
    Freeze,      // edge inside one tree: the tree turns into a unicycle
    GlueToGel,   // tree-gel edge accepted (probability p)
    Discard,     // gel-gel edge, or tree-gel edge rejected
    Ignored,     // strict Poissonized mode only: ring on an already-added edge
};

// Mutable state of one frozen-graph run. Single-threaded by design; run
// replicas on independent states with derived seeds instead.
class GraphState {
public:
    GraphState(long n, double p, bool keep_edges = false)
        : n_(n), p_(p), uf_(static_cast<std::uint32_t>(n)), hist_(n + 1, 0),
          keep_edges_(keep_edges) {
        if (n < 2) throw std::invalid_argument("GraphState: n must be >= 2");
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("GraphState: p in [0,1]");
        hist_[1] = n;
        v_ = n;
        if (keep_edges_) edges_.reserve(static_cast<std::size_t>(n));
    }

    // State injection: a given forest on vertices 1..f.n_vertices plus a
    // fully frozen block on the remaining gel vertices.
    GraphState(long n, double p, const Forest& f, bool keep_edges = false)
        : GraphState(n, p, keep_edges) {
        if (f.n_vertices > n) throw std::invalid_argument("GraphState: forest too large");
        for (const auto& [a, b] : f.edges) {
            const auto ra = uf_.find(a - 1), rb = uf_.find(b - 1);
            hist_remove(uf_.size_of_root(ra));
            hist_remove(uf_.size_of_root(rb));
            hist_insert(uf_.size_of_root(uf_.unite_roots(ra, rb)));
            ++e_;
            if (keep_edges_) edges_.insert(edge_key(a - 1, b - 1));
        }
        std::uint32_t gel_root = 0;
        for (long vtx = f.n_vertices; vtx < n; ++vtx) {
            const auto r = uf_.find(static_cast<std::uint32_t>(vtx));
            hist_remove(uf_.size_of_root(r));
            gel_root = (vtx == f.n_vertices) ? r : uf_.unite_roots(gel_root, r);
        }
        if (f.n_vertices < n) {
            gel_root = uf_.find(gel_root);
            uf_.freeze_root(gel_root);
            g_ = n - f.n_vertices;
            v_ = f.n_vertices;
        }
        m_ = e_ + g_;  // pretend history, so e+g+d=m keeps holding
    }

    long n() const { return n_; }
    double p() const { return p_; }
    long steps() const { return m_; }
    long gel() const { return g_; }
    long discarded() const { return d_; }
    long forest_vertices() const { return v_; }
    long forest_edges() const { return e_; }
    double time() const { return time_; }
    bool fully_frozen() const { return g_ == n_; }
    long tree_count(long k) const { return (k >= 1 && k <= n_) ? hist_[k] : 0; }
    const std::vector<long>& tree_size_histogram() const { return hist_; }

    long largest_tree_size() const {
        for (long k = v_; k >= 1; --k)
            if (hist_[k] > 0) return k;
        return 0;
    }

    // Size of the component containing `vertex` (1-based) and its status.
    std::pair<long, bool> component_of(long vertex) {
        const auto r = uf_.find(static_cast<std::uint32_t>(vertex - 1));
        return {uf_.size_of_root(r), uf_.frozen_root(r)};
    }

    StepOutcome step_discrete(Xoshiro256& rng) {
        const auto [a, b] = draw_pair(rng);
        return apply(a, b, rng);
    }

    // Poisson clock of total rate (n-1)/2 (each of the n(n-1)/2 edges rings
    // at rate 1/n). Default semantics treat every ring as one discrete step;
    // strict mode ignores rings on edges already added to the graph.
    StepOutcome step_poissonized(Xoshiro256& rng, bool strict = false) {
        time_ += rng.exponential(0.5 * (n_ - 1));
        const auto [a, b] = draw_pair(rng);
        if (strict) {
            if (!keep_edges_)
                throw std::logic_error("strict Poissonized mode requires keep_edges");
            if (edges_.count(edge_key(a, b))) return StepOutcome::Ignored;
        }
        return apply(a, b, rng);
    }

    bool has_edge(long u, long v) const {
        return edges_.count(edge_key(static_cast<std::uint32_t>(u - 1),
                                     static_cast<std::uint32_t>(v - 1))) > 0;
    }

    void check_invariants() const {
        if (v_ + g_ != n_) throw std::logic_error("invariant v+g=n violated");
        if (e_ + g_ + d_ != m_) throw std::logic_error("invariant e+g+d=m violated");
        long mass = 0;
        for (long k = 1; k <= n_; ++k) mass += k * hist_[k];
        if (mass != v_) throw std::logic_error("histogram mass != v");
    }

    // Hooks for absorption bookkeeping: sizes removed/inserted by the last step.
    long last_removed_a() const { return last_removed_a_; }
    long last_removed_b() const { return last_removed_b_; }
    long last_inserted() const { return last_inserted_; }

private:
    static std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    std::pair<std::uint32_t, std::uint32_t> draw_pair(Xoshiro256& rng) {
        const auto a = static_cast<std::uint32_t>(rng.below(n_));
        auto b = static_cast<std::uint32_t>(rng.below(n_ - 1));
        if (b >= a) ++b;
        return {a, b};
    }

    void hist_remove(long k) {
        --hist_[k];
        last_removed_b_ = last_removed_a_;
        last_removed_a_ = k;
    }
    void hist_insert(long k) {
        ++hist_[k];
        last_inserted_ = k;
    }

    StepOutcome apply(std::uint32_t a, std::uint32_t b, Xoshiro256& rng) {
        ++m_;
        last_removed_a_ = last_removed_b_ = last_inserted_ = 0;
        const auto ra = uf_.find(a), rb = uf_.find(b);
        const bool fa = uf_.frozen_root(ra), fb = uf_.frozen_root(rb);
        if (fa && fb) {
            ++d_;
            return StepOutcome::Discard;
        }
        if (!fa && !fb) {
            if (ra == rb) {  // within one tree: it freezes, existing or not
                const long k = uf_.size_of_root(ra);
                hist_remove(k);
                uf_.freeze_root(ra);
                g_ += k;
                v_ -= k;
                e_ -= k - 1;
                ++g_count_steps_;
                if (keep_edges_) edges_.insert(edge_key(a, b));
                return StepOutcome::Freeze;
            }
            hist_remove(uf_.size_of_root(ra));
            hist_remove(uf_.size_of_root(rb));
            hist_insert(uf_.size_of_root(uf_.unite_roots(ra, rb)));
            ++e_;
            if (keep_edges_) edges_.insert(edge_key(a, b));
            return StepOutcome::TreeMerge;
        }
        // mixed tree-gel pair: accept with probability p
        if (rng.uniform01() <= p_) {
            const auto tree_root = fa ? rb : ra;
            const long k = uf_.size_of_root(tree_root);
            hist_remove(k);
            const auto nr = uf_.unite_roots(ra, rb);
            uf_.freeze_root(nr);
            g_ += k;
            v_ -= k;
            e_ -= k - 1;
            if (keep_edges_) edges_.insert(edge_key(a, b));
            return StepOutcome::GlueToGel;
        }
        ++d_;
        return StepOutcome::Discard;
    }

    long n_;
    double p_;
    UnionFind uf_;
    long m_ = 0, g_ = 0, d_ = 0, v_ = 0, e_ = 0;
    long g_count_steps_ = 0;
    double time_ = 0.0;
    std::vector<long> hist_;
    long last_removed_a_ = 0, last_removed_b_ = 0, last_inserted_ = 0;
    bool keep_edges_;
    std::unordered_set<std::uint64_t> edges_;
};

enum class SimMode : std::uint8_t { Discrete, Poissonized };

struct SimConfig {
    long n = 1000;
    double p = 1.0;
    SimMode mode = SimMode::Discrete;
    bool strict_ppp = false;
    bool keep_edges = false;
    std::uint64_t seed = 1;
    long k_max = 10;          // tracked tree sizes
    long grid_points = 512;   // trajectory sample points
    double horizon = -1.0;    // grid end in t units (m = n t discrete); < 0: auto
    long step_cap = -1;       // abort after this many steps; < 0: none
};

struct TrajectoryPoint {
    double at;  // m for discrete runs, continuous time otherwise
    long gel, discarded, forest_vertices, forest_edges;
    std::vector<long> tree_counts;  // N^(1..k_max)
};

struct RunRecord {
    SimConfig config;
    bool complete = false;
    double absorption = 0.0;                 // A: steps (discrete) or time
    std::vector<TrajectoryPoint> trajectory;
    std::vector<double> last_tree_of_size;   // A^(k), index 0 unused
    std::vector<double> last_tree_at_least;  // A^(k+), index 0 unused
};

// Run one replica to absorption (or to the step cap). Deterministic in seed.
inline RunRecord run_simulation(const SimConfig& cfg) {
    const bool discrete = cfg.mode == SimMode::Discrete;
    GraphState st(cfg.n, cfg.p, cfg.keep_edges || cfg.strict_ppp);
    Xoshiro256 rng(cfg.seed);

    RunRecord rec;
    rec.config = cfg;
    rec.last_tree_of_size.assign(cfg.k_max + 1, 0.0);
    rec.last_tree_at_least.assign(cfg.k_max + 1, 0.0);

    // running count of trees with size >= k, k <= k_max
    std::vector<long> at_least(cfg.k_max + 1, 0);
    at_least[1] = cfg.n;

    double horizon = cfg.horizon;
    if (horizon <= 0.0) {
        // generous default: past the expected absorption time scale
        const double tn = std::log(static_cast<double>(cfg.n)) / cfg.p;
        horizon = discrete ? 0.75 * tn : 1.5 * tn;
    }
    const double grid_step =
        (discrete ? horizon * cfg.n : horizon) / std::max<long>(cfg.grid_points - 1, 1);
    double next_sample = 0.0;
    rec.trajectory.reserve(cfg.grid_points);

    // Trajectory samples hold the state just before the clock passes the
    // grid point, so a snapshot is taken ahead of any step that may cross.
    TrajectoryPoint snap;
    snap.tree_counts.resize(cfg.k_max);
    const auto take_snapshot = [&] {
        snap.gel = st.gel();
        snap.discarded = st.discarded();
        snap.forest_vertices = st.forest_vertices();
        snap.forest_edges = st.forest_edges();
        for (long k = 1; k <= cfg.k_max; ++k) snap.tree_counts[k - 1] = st.tree_count(k);
    };
    const auto grid_full = [&] {
        return rec.trajectory.size() >= static_cast<std::size_t>(cfg.grid_points);
    };

    const auto update_extinction = [&](double stamp) {
        const auto upd = [&](long size, long delta) {
            if (size <= 0) return;
            for (long k = 1; k <= std::min(size, cfg.k_max); ++k) {
                at_least[k] += delta;
                if (delta < 0 && at_least[k] == 0) rec.last_tree_at_least[k] = stamp;
            }
            if (size <= cfg.k_max && delta < 0 && st.tree_count(size) == 0)
                rec.last_tree_of_size[size] = stamp;
        };
        upd(st.last_removed_a(), -1);
        upd(st.last_removed_b(), -1);
        upd(st.last_inserted(), +1);
    };

    while (!st.fully_frozen()) {
        if (cfg.step_cap >= 0 && st.steps() >= cfg.step_cap) {
            rec.complete = false;
            rec.absorption = discrete ? static_cast<double>(st.steps()) : st.time();
            return rec;
        }
        const bool may_cross =
            !grid_full() && (!discrete || st.steps() + 1.0 > next_sample);
        if (may_cross) take_snapshot();
        const auto outcome = discrete ? st.step_discrete(rng)
                                      : st.step_poissonized(rng, cfg.strict_ppp);
        const double now = discrete ? static_cast<double>(st.steps()) : st.time();
        if (may_cross) {
            while (!grid_full() && now > next_sample) {
                snap.at = next_sample;
                rec.trajectory.push_back(snap);
                next_sample += grid_step;
            }
        }
        if (outcome == StepOutcome::Freeze || outcome == StepOutcome::GlueToGel ||
            outcome == StepOutcome::TreeMerge)
            update_extinction(now);
    }
    while (!grid_full()) {  // fully frozen: the tail of the grid is constant
        take_snapshot();
        snap.at = next_sample;
        rec.trajectory.push_back(snap);
        next_sample += grid_step;
    }
    rec.complete = true;
    rec.absorption = discrete ? static_cast<double>(st.steps()) : st.time();
    return rec;
}

}  // namespace frozen_er
