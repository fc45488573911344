#include "ambdispatch/geo_network.h"

#include "ambdispatch/error.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace amb {

double edge_travel_time(const Edge& edge)
{
    return edge.length_m / edge.free_speed_mps * edge.congestion_factor;
}

RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges))
{
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
        if (!node_lookup_.emplace(nodes_[i].id, i).second)
            throw Error(ErrorCode::InvalidNetwork, "duplicate node id '" + nodes_[i].id + "'");
    }
    adjacency_.resize(nodes_.size());
    from_.reserve(edges_.size());
    to_.reserve(edges_.size());
    for (EdgeIndex i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (!edge_lookup_.emplace(e.id, i).second)
            throw Error(ErrorCode::InvalidNetwork, "duplicate edge id '" + e.id + "'");
        auto from = find_node(e.from);
        auto to = find_node(e.to);
        if (!from || !to)
            throw Error(ErrorCode::InvalidNetwork, "edge '" + e.id + "' references a missing node");
        if (!(e.length_m > 0.0) || !std::isfinite(e.length_m))
            throw Error(ErrorCode::InvalidNetwork, "edge '" + e.id + "' needs length_m > 0");
        if (!(e.free_speed_mps > 0.0) || !std::isfinite(e.free_speed_mps))
            throw Error(ErrorCode::InvalidNetwork, "edge '" + e.id + "' needs free_speed_mps > 0");
        if (!(e.congestion_factor >= 1.0) || !std::isfinite(e.congestion_factor))
            throw Error(ErrorCode::InvalidNetwork, "edge '" + e.id + "' needs congestion_factor >= 1");
        from_.push_back(*from);
        to_.push_back(*to);
        adjacency_[*from].push_back(i);
    }
    for (auto& out : adjacency_) {
        std::sort(out.begin(), out.end(),
                  [this](EdgeIndex a, EdgeIndex b) { return edges_[a].id < edges_[b].id; });
    }
}

std::optional<NodeIndex> RoadNetwork::find_node(const std::string& id) const
{
    auto it = node_lookup_.find(id);
    if (it == node_lookup_.end())
        return std::nullopt;
    return it->second;
}

std::optional<EdgeIndex> RoadNetwork::find_edge(const std::string& id) const
{
    auto it = edge_lookup_.find(id);
    if (it == edge_lookup_.end())
        return std::nullopt;
    return it->second;
}

NodeIndex RoadNetwork::node_index(const std::string& id) const
{
    auto n = find_node(id);
    if (!n)
        throw Error(ErrorCode::UnknownNode, "no node '" + id + "'");
    return *n;
}

EdgeIndex RoadNetwork::edge_index(const std::string& id) const
{
    auto e = find_edge(id);
    if (!e)
        throw Error(ErrorCode::UnknownEdge, "no edge '" + id + "'");
    return *e;
}

namespace {

// Dijkstra label: cost plus the full edge path. Keeping the path lets equal-cost
// relaxations compare edge-id sequences directly. Costs are strictly positive,
// so two equal-cost paths to a node never stand in a prefix relation and the
// lexicographic order survives extension by a common edge.
struct Label {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<EdgeIndex> path;
    bool settled = false;
};

bool ids_less(const RoadNetwork& net, const std::vector<EdgeIndex>& a, const std::vector<EdgeIndex>& b)
{
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [&net](EdgeIndex x, EdgeIndex y) { return net.edge(x).id < net.edge(y).id; });
}

} // namespace

Route shortest_path(const RoadNetwork& net, const std::string& origin, const std::string& dest)
{
    return shortest_path(net, net.node_index(origin), net.node_index(dest));
}

Route shortest_path(const RoadNetwork& net, NodeIndex origin, NodeIndex dest)
{
    if (origin >= net.nodes().size() || dest >= net.nodes().size())
        throw Error(ErrorCode::UnknownNode, "node index out of range");

    std::vector<Label> labels(net.nodes().size());
    labels[origin].cost = 0.0;

    using Entry = std::pair<double, NodeIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    open.emplace(0.0, origin);

    while (!open.empty()) {
        auto [cost, u] = open.top();
        open.pop();
        if (labels[u].settled || cost != labels[u].cost)
            continue;
        labels[u].settled = true;
        if (u == dest)
            break;
        for (EdgeIndex e : net.outgoing(u)) {
            NodeIndex v = net.to_index(e);
            if (labels[v].settled)
                continue;
            double next = labels[u].cost + edge_travel_time(net.edge(e));
            std::vector<EdgeIndex> path = labels[u].path;
            path.push_back(e);
            if (next < labels[v].cost || (next == labels[v].cost && ids_less(net, path, labels[v].path))) {
                bool improved_cost = next < labels[v].cost;
                labels[v].cost = next;
                labels[v].path = std::move(path);
                if (improved_cost)
                    open.emplace(next, v);
            }
        }
    }

    if (!labels[dest].settled)
        throw Error(ErrorCode::NoRoute,
                    "no route from '" + net.node(origin).id + "' to '" + net.node(dest).id + "'");
    return make_route(net, origin, labels[dest].path);
}

Route make_route(const RoadNetwork& net, NodeIndex origin, const std::vector<EdgeIndex>& edges)
{
    Route route;
    route.origin = origin;
    route.destination = origin;
    route.edges = edges;
    for (EdgeIndex e : edges) {
        if (e >= net.edges().size())
            throw Error(ErrorCode::UnknownEdge, "edge index out of range");
        if (net.from_index(e) != route.destination)
            throw Error(ErrorCode::InvalidNetwork, "route is not contiguous at edge '" + net.edge(e).id + "'");
        route.total_time_s += edge_travel_time(net.edge(e));
        route.total_length_m += net.edge(e).length_m;
        route.destination = net.to_index(e);
    }
    return route;
}

std::vector<std::string> edge_ids(const RoadNetwork& net, const Route& route)
{
    std::vector<std::string> ids;
    ids.reserve(route.edges.size());
    for (EdgeIndex e : route.edges)
        ids.push_back(net.edge(e).id);
    return ids;
}

MapPosition map_match(const RoadNetwork& net, double x, double y)
{
    if (net.edges().empty())
        throw Error(ErrorCode::EmptyNetwork, "network has no edges to match against");

    std::optional<MapPosition> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (EdgeIndex e = 0; e < net.edges().size(); ++e) {
        const Node& a = net.node(net.from_index(e));
        const Node& b = net.node(net.to_index(e));
        double dx = b.x - a.x;
        double dy = b.y - a.y;
        double seg2 = dx * dx + dy * dy;
        double t = seg2 > 0.0 ? ((x - a.x) * dx + (y - a.y) * dy) / seg2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        double px = a.x + t * dx - x;
        double py = a.y + t * dy - y;
        double d2 = px * px + py * py;
        bool better = d2 < best_d2 || (d2 == best_d2 && net.edge(e).id < net.edge(best->edge).id);
        if (better) {
            best_d2 = d2;
            best = MapPosition{e, t * net.edge(e).length_m};
        }
    }
    return *best;
}

double distance_to_stop_line(const RoadNetwork& net, const MapPosition& pos)
{
    if (pos.edge >= net.edges().size())
        throw Error(ErrorCode::UnknownEdge, "edge index out of range");
    const Edge& e = net.edge(pos.edge);
    if (!e.stop_line)
        throw Error(ErrorCode::NoStopLine, "edge '" + e.id + "' is not signal-controlled");
    return e.length_m - pos.offset_m;
}

} // namespace amb
