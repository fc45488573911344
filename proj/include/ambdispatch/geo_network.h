#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace amb {

using NodeIndex = std::size_t;
using EdgeIndex = std::size_t;

struct Node {
    std::string id;
    double x = 0.0; // meters
    double y = 0.0;
};

/// Signal-controlled end of an edge: which controller owns the stop line and
/// which of its approaches the edge feeds.
struct StopLine {
    std::string controller;
    std::string approach;
};

struct Edge {
    std::string id;
    std::string from;
    std::string to;
    double length_m = 0.0;
    double free_speed_mps = 0.0;
    double congestion_factor = 1.0;
    std::optional<StopLine> stop_line;
};

/// Predicted traversal time: free-flow time scaled by the static congestion factor.
double edge_travel_time(const Edge& edge);

/// Immutable directed road graph. Construction validates every edge and builds
/// the adjacency lists (outgoing edges per node, ordered by edge id).
class RoadNetwork {
public:
    RoadNetwork() = default;
    RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool empty() const { return nodes_.empty(); }

    std::optional<NodeIndex> find_node(const std::string& id) const;
    std::optional<EdgeIndex> find_edge(const std::string& id) const;
    NodeIndex node_index(const std::string& id) const; // throws UnknownNode
    EdgeIndex edge_index(const std::string& id) const; // throws UnknownEdge

    const Node& node(NodeIndex i) const { return nodes_[i]; }
    const Edge& edge(EdgeIndex i) const { return edges_[i]; }
    NodeIndex from_index(EdgeIndex e) const { return from_[e]; }
    NodeIndex to_index(EdgeIndex e) const { return to_[e]; }
    const std::vector<EdgeIndex>& outgoing(NodeIndex n) const { return adjacency_[n]; }

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<NodeIndex> from_;
    std::vector<NodeIndex> to_;
    std::vector<std::vector<EdgeIndex>> adjacency_;
    std::unordered_map<std::string, NodeIndex> node_lookup_;
    std::unordered_map<std::string, EdgeIndex> edge_lookup_;
};

struct Route {
    NodeIndex origin = 0;
    NodeIndex destination = 0;
    std::vector<EdgeIndex> edges;
    double total_time_s = 0.0;
    double total_length_m = 0.0;

    bool empty() const { return edges.empty(); }
};

/// Minimum travel-time route. Among equal-time routes the one whose edge-id
/// sequence is lexicographically smallest wins, so replays are deterministic.
Route shortest_path(const RoadNetwork& net, const std::string& origin, const std::string& dest);
Route shortest_path(const RoadNetwork& net, NodeIndex origin, NodeIndex dest);

struct MapPosition {
    EdgeIndex edge = 0;
    double offset_m = 0.0; // along the edge, in [0, length_m]
};

/// Projects a planar point onto the nearest edge segment (clamped to the
/// segment ends). Equal distances resolve to the lower edge id.
MapPosition map_match(const RoadNetwork& net, double x, double y);

/// Remaining distance to the signal-controlled end of the edge.
double distance_to_stop_line(const RoadNetwork& net, const MapPosition& pos);

/// Rebuilds a route from an explicit edge list, checking contiguity.
Route make_route(const RoadNetwork& net, NodeIndex origin, const std::vector<EdgeIndex>& edges);

std::vector<std::string> edge_ids(const RoadNetwork& net, const Route& route);

} // namespace amb
