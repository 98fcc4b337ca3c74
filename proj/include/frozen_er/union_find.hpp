#pragma once

#include <cstdint>
#include <vector>

namespace frozen_er {

// Disjoint-set forest with union by size and path halving.
// Component size and frozen status live on the root.
class UnionFind {
public:
    explicit UnionFind(std::uint32_t n) : parent_(n), size_(n, 1), frozen_(n, 0) {
        for (std::uint32_t i = 0; i < n; ++i) parent_[i] = i;
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Merge the components rooted at ra and rb; returns the new root.
    std::uint32_t unite_roots(std::uint32_t ra, std::uint32_t rb) {
        if (size_[ra] < size_[rb]) std::swap(ra, rb);
        parent_[rb] = ra;
        size_[ra] += size_[rb];
        return ra;
    }

    std::uint32_t size_of_root(std::uint32_t r) const { return size_[r]; }
    bool frozen_root(std::uint32_t r) const { return frozen_[r] != 0; }
    void freeze_root(std::uint32_t r) { frozen_[r] = 1; }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::vector<std::uint8_t> frozen_;
};

}  // namespace frozen_er
