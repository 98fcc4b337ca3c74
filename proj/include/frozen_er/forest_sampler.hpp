#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "frozen_er/rng.hpp"
#include "frozen_er/special.hpp"

namespace frozen_er {

struct Forest {
    long n_vertices = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> components;  // vertex lists, each a tree
};

// Component sizes of a uniform forest with N vertices and M edges: the
// increments of a mu_x random walk conditioned to hit N after N-M steps.
// A dense forward table P(S_j = s) is built once; each sample walks the
// table backwards. The tilt x is free (the conditioned law does not depend
// on it); theta = 2M/N centers the walk so the table stays well scaled.
class ComponentSizeSampler {
public:
    static constexpr std::size_t kMaxTableEntries = 20'000'000;

    ComponentSizeSampler(long N, long M, double theta = -1.0) : n_(N), m_(M) {
        if (N < 1 || M < 0 || M > N - 1)
            throw std::domain_error("ComponentSizeSampler: need 0 <= M <= N-1");
        steps_ = N - M;
        if (steps_ <= 0) throw std::domain_error("ComponentSizeSampler: N-M must be positive");
        if (theta <= 0.0) theta = std::clamp(2.0 * M / N, 0.05, 1.0);
        theta_ = theta;
        const MuX mu = MuX::from_theta(theta);
        pmf_.assign(N + 1, 0.0);
        for (long k = 1; k <= N; ++k) pmf_[k] = mu_pmf(mu, k);

        exact_ = static_cast<std::size_t>(steps_ + 1) * (N + 1) <= kMaxTableEntries;
        if (!exact_) return;  // fall back to tilted rejection in sample()
        table_.assign(steps_ + 1, std::vector<double>(N + 1, 0.0));
        table_[0][0] = 1.0;
        for (long j = 1; j <= steps_; ++j) {
            // support of S_j given the remaining steps: [j, N - (steps - j)]
            const long hi = N - (steps_ - j);
            for (long s = j; s <= hi; ++s) {
                double acc = 0.0;
                const long kmax = s - (j - 1);
                for (long k = 1; k <= kmax; ++k) acc += pmf_[k] * table_[j - 1][s - k];
                table_[j][s] = acc;
            }
        }
        if (table_[steps_][N] <= 0.0)
            throw std::runtime_error("ComponentSizeSampler: walk table underflow");
    }

    bool exact_table() const { return exact_; }

    std::vector<long> sample(Xoshiro256& rng) const {
        if (steps_ == 1) return {n_};
        if (m_ == 0) return std::vector<long>(n_, 1);
        return exact_ ? sample_exact(rng) : sample_rejection(rng);
    }

private:
    std::vector<long> sample_exact(Xoshiro256& rng) const {
        std::vector<long> sizes(steps_);
        long remaining = n_;
        for (long j = steps_; j >= 2; --j) {
            // increment c with weight pmf[c] * P(S_{j-1} = remaining - c);
            // accumulating in the same order the table row was built makes
            // the scan provably terminate at c = kmax.
            const double total = table_[j][remaining];
            const long kmax = remaining - (j - 1);
            double target = rng.uniform01() * total;
            double acc = 0.0;
            long c = kmax;
            for (long k = 1; k <= kmax; ++k) {
                acc += pmf_[k] * table_[j - 1][remaining - k];
                if (acc >= target) {
                    c = k;
                    break;
                }
            }
            sizes[steps_ - j] = c;
            remaining -= c;
        }
        sizes[steps_ - 1] = remaining;
        return sizes;
    }

    std::vector<long> sample_rejection(Xoshiro256& rng) const {
        std::vector<double> cum(pmf_.size());
        std::partial_sum(pmf_.begin(), pmf_.end(), cum.begin());
        const double z = cum.back();
        std::vector<long> sizes(steps_);
        for (;;) {
            long total = 0;
            bool overflow = false;
            for (long j = 0; j < steps_; ++j) {
                const double u = rng.uniform01() * z;
                const long c =
                    std::upper_bound(cum.begin() + 1, cum.end(), u) - cum.begin();
                sizes[j] = c;
                total += c;
                if (total > n_ || total + (steps_ - 1 - j) > n_) {
                    overflow = true;
                    break;
                }
            }
            if (!overflow && total == n_) return sizes;
        }
    }

    long n_, m_, steps_;
    double theta_;
    bool exact_ = false;
    std::vector<double> pmf_;
    std::vector<std::vector<double>> table_;
};

// Uniform labeled tree on the given vertices via a uniform Prufer sequence.
inline std::vector<std::pair<int, int>> sample_cayley_tree(
    const std::vector<int>& labels, Xoshiro256& rng) {
    const long k = static_cast<long>(labels.size());
    if (k < 1) throw std::domain_error("sample_cayley_tree: need at least one vertex");
    std::vector<std::pair<int, int>> edges;
    if (k == 1) return edges;
    if (k == 2) return {{labels[0], labels[1]}};
    std::vector<int> code(k - 2);
    for (auto& c : code) c = static_cast<int>(rng.below(k));
    std::vector<int> degree(k, 1);
    for (int c : code) ++degree[c];
    edges.reserve(k - 1);
    int ptr = 0;
    while (degree[ptr] != 1) ++ptr;
    int leaf = ptr;
    for (int c : code) {
        edges.emplace_back(labels[leaf], labels[c]);
        if (--degree[c] == 1 && c < ptr) {
            leaf = c;
        } else {
            while (degree[++ptr] != 1) {}
            leaf = ptr;
        }
    }
    edges.emplace_back(labels[leaf], labels[k - 1]);
    return edges;
}

// Uniform element of W(N, M): conditioned-walk sizes, a uniform unordered
// assignment of labels to components, then independent uniform Cayley trees.
class ForestSampler {
public:
    ForestSampler(long N, long M, double theta = -1.0)
        : n_(N), m_(M), sizes_(N, M, theta) {}

    Forest sample(Xoshiro256& rng) const {
        Forest f;
        f.n_vertices = n_;
        f.edges.reserve(m_);
        std::vector<long> sizes = sizes_.sample(rng);
        std::vector<int> labels(n_);
        std::iota(labels.begin(), labels.end(), 1);
        for (long i = n_ - 1; i > 0; --i)
            std::swap(labels[i], labels[rng.below(i + 1)]);
        f.components.reserve(sizes.size());
        std::size_t pos = 0;
        for (long sz : sizes) {
            std::vector<int> comp(labels.begin() + pos, labels.begin() + pos + sz);
            pos += sz;
            auto tree = sample_cayley_tree(comp, rng);
            f.edges.insert(f.edges.end(), tree.begin(), tree.end());
            std::sort(comp.begin(), comp.end());
            f.components.push_back(std::move(comp));
        }
        return f;
    }

private:
    long n_, m_;
    ComponentSizeSampler sizes_;
};

inline Forest sample_forest(long N, long M, Xoshiro256& rng) {
    return ForestSampler(N, M).sample(rng);
}

}  // namespace frozen_er
