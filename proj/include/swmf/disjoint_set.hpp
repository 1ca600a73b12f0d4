#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace swmf {

/// Union-find over 0..n-1 with path halving and union by size.
struct DisjointSet {
    std::vector<std::int64_t> parent;
    std::vector<std::int64_t> size;

    explicit DisjointSet(std::int64_t n) : parent(static_cast<std::size_t>(n)), size(static_cast<std::size_t>(n), 1)
    {
        std::iota(parent.begin(), parent.end(), std::int64_t{0});
    }

    std::int64_t find(std::int64_t x)
    {
        while (parent[static_cast<std::size_t>(x)] != x) {
            auto& px = parent[static_cast<std::size_t>(x)];
            px = parent[static_cast<std::size_t>(px)];
            x = px;
        }
        return x;
    }

    void unite(std::int64_t a, std::int64_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[static_cast<std::size_t>(a)] < size[static_cast<std::size_t>(b)]) std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
        size[static_cast<std::size_t>(a)] += size[static_cast<std::size_t>(b)];
    }
};

}  // namespace swmf
