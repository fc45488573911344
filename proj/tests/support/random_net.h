#pragma once

#include "ambdispatch/geo_network.h"

#include <random>
#include <string>
#include <vector>

namespace synth {

// Random directed network with up to `max_nodes` nodes and `max_edges` edges.
// Lengths and speeds come from small integer sets so equal-time routes are common.
inline amb::RoadNetwork random_network(std::mt19937_64& rng, int max_nodes = 10, int max_edges = 20)
{
    std::uniform_int_distribution<int> n_dist(2, max_nodes);
    int n = n_dist(rng);
    std::vector<amb::Node> nodes;
    std::uniform_real_distribution<double> coord(0.0, 1000.0);
    for (int i = 0; i < n; ++i)
        nodes.push_back({"n" + std::to_string(i), coord(rng), coord(rng)});

    std::uniform_int_distribution<int> m_dist(1, max_edges);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_int_distribution<int> len(1, 6);
    std::uniform_int_distribution<int> speed(1, 3);
    std::uniform_int_distribution<int> congestion(0, 3);
    int m = m_dist(rng);
    std::vector<amb::Edge> edges;
    for (int tries = 0; static_cast<int>(edges.size()) < m && tries < 200; ++tries) {
        int a = pick(rng), b = pick(rng);
        if (a == b)
            continue;
        // parallel edges are allowed and exercise the id tie-break
        amb::Edge e;
        e.id = (edges.size() < 10 ? "e0" : "e") + std::to_string(edges.size());
        e.from = nodes[a].id;
        e.to = nodes[b].id;
        e.length_m = 50.0 * len(rng);
        e.free_speed_mps = 5.0 * speed(rng);
        e.congestion_factor = 1.0 + 0.5 * congestion(rng);
        edges.push_back(e);
    }
    return amb::RoadNetwork(std::move(nodes), std::move(edges));
}

} // namespace synth
