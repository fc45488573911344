#pragma once

// Reference implementations used only by tests. They follow the definitions
// directly (enumeration, double loops) and share no code with the library's
// accelerated paths.

#include "ambdispatch/geo_network.h"
#include "ambdispatch/recognition.h"

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct PathResult {
    double time_s = std::numeric_limits<double>::infinity();
    std::vector<std::string> edge_ids; // lexicographically smallest among the fastest
};

/// Enumerates every simple directed path from origin to dest.
inline std::optional<PathResult> fastest_simple_path(const amb::RoadNetwork& net, amb::NodeIndex origin,
                                                     amb::NodeIndex dest)
{
    std::optional<PathResult> best;
    std::vector<bool> visited(net.nodes().size(), false);
    std::vector<amb::EdgeIndex> stack;

    auto consider = [&]() {
        double t = 0.0;
        std::vector<std::string> ids;
        for (amb::EdgeIndex e : stack) {
            t += amb::edge_travel_time(net.edge(e));
            ids.push_back(net.edge(e).id);
        }
        if (!best || t < best->time_s || (t == best->time_s && ids < best->edge_ids))
            best = PathResult{t, ids};
    };

    auto dfs = [&](auto&& self, amb::NodeIndex u) -> void {
        if (u == dest) {
            consider();
            return;
        }
        visited[u] = true;
        for (amb::EdgeIndex e = 0; e < net.edges().size(); ++e) {
            if (net.from_index(e) != u || visited[net.to_index(e)])
                continue;
            stack.push_back(e);
            self(self, net.to_index(e));
            stack.pop_back();
        }
        visited[u] = false;
    };
    dfs(dfs, origin);
    return best;
}

inline int l1(amb::Point a, amb::Point b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

/// Pattern dissimilarity evaluated with a naive nearest-point search.
inline std::int64_t naive_dissimilarity(const std::vector<amb::Point>& pattern,
                                        const std::vector<amb::Point>& edges, amb::Point t)
{
    std::int64_t total = 0;
    for (amb::Point p : pattern) {
        int best = std::numeric_limits<int>::max();
        for (amb::Point e : edges)
            best = std::min(best, l1({p.x + t.x, p.y + t.y}, e));
        total += best;
    }
    return total;
}

inline std::vector<int> naive_field(int w, int h, const std::vector<amb::Point>& edges)
{
    std::vector<int> f(static_cast<std::size_t>(w) * h, std::numeric_limits<int>::max());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (amb::Point e : edges)
                f[static_cast<std::size_t>(y) * w + x] = std::min(f[static_cast<std::size_t>(y) * w + x], l1({x, y}, e));
    return f;
}

struct BruteMatch {
    amb::Point translation;
    std::int64_t d = 0;
};

/// Every in-frame translation scored with the naive dissimilarity; ties keep smallest y, then x.
inline BruteMatch brute_match(const std::vector<amb::Point>& pattern, int pw, int ph, int w, int h,
                              const std::vector<amb::Point>& edges)
{
    BruteMatch best{{0, 0}, std::numeric_limits<std::int64_t>::max()};
    for (int ty = 0; ty + ph <= h; ++ty) {
        for (int tx = 0; tx + pw <= w; ++tx) {
            std::int64_t d = naive_dissimilarity(pattern, edges, {tx, ty});
            if (d < best.d)
                best = {{tx, ty}, d};
        }
    }
    return best;
}

} // namespace oracle
