#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "indoorsq/floorplan.hpp"
#include "indoorsq/geometry.hpp"

namespace indoorsq {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GraphNode {
    uint32_t id = 0;
    Vec2 pos;
};

// `u` is the lexicographically smaller endpoint; offsets run from u to v.
struct GraphEdge {
    uint32_t id = 0;
    uint32_t u = 0, v = 0;
    double length = 0.0;
    uint32_t hallway = 0;
};

struct GraphLocation {
    enum class Kind : uint8_t { Edge, Room };
    Kind kind = Kind::Edge;
    uint32_t edge = 0;
    double offset = 0.0;
    uint32_t room = 0;

    static GraphLocation on_edge(uint32_t e, double off) { return {Kind::Edge, e, off, 0}; }
    static GraphLocation in_room(uint32_t r) { return {Kind::Room, 0, 0.0, r}; }
    bool on_graph() const { return kind == Kind::Edge; }
};

struct DoorNode {
    uint32_t node = 0;
    uint32_t room = 0;
    uint32_t door = 0;
};

class WalkingGraph {
public:
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adjacency; // node -> (edge, peer node)
    std::vector<DoorNode> door_nodes;
    std::vector<std::vector<uint32_t>> room_doors;   // room idx -> door node ids
    std::vector<std::vector<uint32_t>> rooms_at_node; // node -> attached room idxs
    // per hallway: ordered (start param, edge id), edges chained along the centerline
    std::vector<std::vector<std::pair<double, uint32_t>>> hallway_chain;

    Vec2 point_at(const GraphLocation& loc) const {
        const GraphEdge& e = edges.at(loc.edge);
        Vec2 a = nodes[e.u].pos, b = nodes[e.v].pos;
        double t = loc.offset / e.length;
        return a + (b - a) * t;
    }

    // (edge, offset) for a point `t` meters along a hallway centerline.
    GraphLocation locate_on_hallway(uint32_t hallway, double t) const {
        const auto& chain = hallway_chain.at(hallway);
        for (const auto& [start, eid] : chain) {
            const GraphEdge& e = edges[eid];
            if (t <= start + e.length + 1e-9) {
                double along = std::clamp(t - start, 0.0, e.length);
                // chain orientation may oppose the edge's canonical u->v direction
                double off = chain_forward(hallway, eid) ? along : e.length - along;
                return GraphLocation::on_edge(eid, off);
            }
        }
        const auto& [start, eid] = chain.back();
        (void)start;
        return GraphLocation::on_edge(eid, chain_forward(hallway, eid) ? edges[eid].length : 0.0);
    }

    bool chain_forward(uint32_t hallway, uint32_t eid) const {
        // true when walking the hallway in increasing param follows u -> v
        const GraphEdge& e = edges[eid];
        const Hallway& h = (*plan_).hallways[hallway];
        double tu = h.param_of(nodes[e.u].pos);
        double tv = h.param_of(nodes[e.v].pos);
        return tu < tv;
    }

    // Shortest network distances from `node` to every node; cached per source.
    const std::vector<double>& node_distances(uint32_t node) const {
        std::lock_guard<std::mutex> lk(cache_->mu);
        auto it = cache_->map.find(node);
        if (it != cache_->map.end()) return it->second;
        auto [ins, ok] = cache_->map.emplace(node, dijkstra(node));
        (void)ok;
        return ins->second;
    }

    double node_to_node(uint32_t a, uint32_t b) const { return node_distances(a)[b]; }

    double shortest_network_distance(const GraphLocation& a, const GraphLocation& b) const {
        if (a.kind == GraphLocation::Kind::Room || b.kind == GraphLocation::Kind::Room) {
            // room locations measure from their door nodes
            double best = kUnreachable;
            if (a.kind == GraphLocation::Kind::Room && b.kind == GraphLocation::Kind::Room) {
                if (a.room == b.room) return 0.0;
                for (uint32_t da : room_doors.at(a.room))
                    for (uint32_t db : room_doors.at(b.room))
                        best = std::min(best, node_to_node(da, db));
                return best;
            }
            const GraphLocation& room = a.kind == GraphLocation::Kind::Room ? a : b;
            const GraphLocation& loc = a.kind == GraphLocation::Kind::Room ? b : a;
            for (uint32_t d : room_doors.at(room.room))
                best = std::min(best, distance_to_node(loc, d));
            return best;
        }
        const GraphEdge& ea = edges.at(a.edge);
        const GraphEdge& eb = edges.at(b.edge);
        double best = kUnreachable;
        if (a.edge == b.edge) best = std::abs(a.offset - b.offset);
        const auto& du = node_distances(ea.u);
        const auto& dv = node_distances(ea.v);
        double head_u = a.offset, head_v = ea.length - a.offset;
        best = std::min(best, head_u + du[eb.u] + b.offset);
        best = std::min(best, head_u + du[eb.v] + (eb.length - b.offset));
        best = std::min(best, head_v + dv[eb.u] + b.offset);
        best = std::min(best, head_v + dv[eb.v] + (eb.length - b.offset));
        return best;
    }

    double distance_to_node(const GraphLocation& a, uint32_t n) const {
        const GraphEdge& e = edges.at(a.edge);
        return std::min(a.offset + node_to_node(e.u, n), (e.length - a.offset) + node_to_node(e.v, n));
    }

    // Nearest graph location to an arbitrary indoor point; ties resolved by
    // lowest edge id so repeated projections are stable.
    GraphLocation project_to_graph(Vec2 p, double* out_dist = nullptr) const {
        double best = std::numeric_limits<double>::max();
        GraphLocation loc;
        for (const GraphEdge& e : edges) {
            Vec2 a = nodes[e.u].pos, b = nodes[e.v].pos;
            double t = project_param_on_segment(p, a, b);
            Vec2 foot = a + (b - a) * (t / e.length);
            double d = p.dist(foot);
            if (d < best - 1e-12) {
                best = d;
                loc = GraphLocation::on_edge(e.id, t);
            }
        }
        if (out_dist) *out_dist = best;
        return loc;
    }

    const FloorPlan& plan() const { return *plan_; }

    friend WalkingGraph build_walking_graph(const FloorPlan& plan);

private:
    struct DistanceCache {
        std::mutex mu;
        std::unordered_map<uint32_t, std::vector<double>> map;
    };

    const FloorPlan* plan_ = nullptr;
    std::shared_ptr<DistanceCache> cache_ = std::make_shared<DistanceCache>();

    std::vector<double> dijkstra(uint32_t src) const {
        std::vector<double> dist(nodes.size(), kUnreachable);
        using Item = std::pair<double, uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[src] = 0.0;
        pq.push({0.0, src});
        while (!pq.empty()) {
            auto [d, n] = pq.top();
            pq.pop();
            if (d > dist[n]) continue;
            for (auto [eid, peer] : adjacency[n]) {
                double nd = d + edges[eid].length;
                if (nd < dist[peer]) {
                    dist[peer] = nd;
                    pq.push({nd, peer});
                }
            }
        }
        return dist;
    }
};

inline WalkingGraph build_walking_graph(const FloorPlan& plan) {
    WalkingGraph g;
    g.plan_ = &plan;

    auto key = [](Vec2 p) {
        return std::pair<int64_t, int64_t>(llround(p.x * 1e9), llround(p.y * 1e9));
    };
    std::map<std::pair<int64_t, int64_t>, uint32_t> node_of;
    auto intern = [&](Vec2 p) {
        auto k = key(p);
        auto it = node_of.find(k);
        if (it != node_of.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(g.nodes.size());
        g.nodes.push_back({id, p});
        node_of.emplace(k, id);
        return id;
    };

    // cut parameters per hallway: endpoints, door projections, centerline crossings
    std::vector<std::vector<double>> cuts(plan.hallways.size());
    for (uint32_t hi = 0; hi < plan.hallways.size(); ++hi) {
        const Hallway& h = plan.hallways[hi];
        cuts[hi].push_back(0.0);
        cuts[hi].push_back(h.length());
    }
    for (const Door& d : plan.doors)
        cuts[plan.hallway_idx.at(d.hallway_id)].push_back(d.position);
    for (uint32_t i = 0; i < plan.hallways.size(); ++i) {
        for (uint32_t j = i + 1; j < plan.hallways.size(); ++j) {
            const Hallway& a = plan.hallways[i];
            const Hallway& b = plan.hallways[j];
            if (a.horizontal() == b.horizontal()) {
                // parallel: only endpoint touches form joints
                for (Vec2 p : {b.a, b.b}) {
                    double t = a.param_of(p);
                    if (t >= -1e-9 && t <= a.length() + 1e-9 && a.point_at(std::clamp(t, 0.0, a.length())).dist(p) < 1e-9) {
                        cuts[i].push_back(std::clamp(t, 0.0, a.length()));
                        cuts[j].push_back(b.param_of(p) < b.length() / 2 ? 0.0 : b.length());
                    }
                }
                continue;
            }
            const Hallway& hor = a.horizontal() ? a : b;
            const Hallway& ver = a.horizontal() ? b : a;
            double x = ver.a.x, y = hor.a.y;
            double th = hor.param_of({x, y});
            double tv = ver.param_of({x, y});
            if (th >= -1e-9 && th <= hor.length() + 1e-9 && tv >= -1e-9 && tv <= ver.length() + 1e-9) {
                cuts[a.horizontal() ? i : j].push_back(std::clamp(th, 0.0, hor.length()));
                cuts[a.horizontal() ? j : i].push_back(std::clamp(tv, 0.0, ver.length()));
            }
        }
    }

    g.hallway_chain.resize(plan.hallways.size());
    for (uint32_t hi = 0; hi < plan.hallways.size(); ++hi) {
        const Hallway& h = plan.hallways[hi];
        auto& ts = cuts[hi];
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end(), [](double x, double y) { return std::abs(x - y) < 1e-9; }),
                 ts.end());
        for (size_t k = 0; k + 1 < ts.size(); ++k) {
            Vec2 pa = h.point_at(ts[k]);
            Vec2 pb = h.point_at(ts[k + 1]);
            uint32_t na = intern(pa);
            uint32_t nb = intern(pb);
            if (na == nb) continue;
            GraphEdge e;
            e.id = static_cast<uint32_t>(g.edges.size());
            bool a_smaller = std::pair(pa.x, pa.y) < std::pair(pb.x, pb.y);
            e.u = a_smaller ? na : nb;
            e.v = a_smaller ? nb : na;
            e.length = pa.dist(pb);
            e.hallway = hi;
            g.edges.push_back(e);
            g.hallway_chain[hi].push_back({ts[k], e.id});
        }
    }

    g.adjacency.resize(g.nodes.size());
    for (const GraphEdge& e : g.edges) {
        g.adjacency[e.u].push_back({e.id, e.v});
        g.adjacency[e.v].push_back({e.id, e.u});
    }

    g.room_doors.resize(plan.rooms.size());
    g.rooms_at_node.resize(g.nodes.size());
    for (uint32_t di = 0; di < plan.doors.size(); ++di) {
        const Door& d = plan.doors[di];
        const Hallway& h = plan.hallways[plan.hallway_idx.at(d.hallway_id)];
        uint32_t node = intern(h.point_at(d.position));
        uint32_t room = plan.room_idx.at(d.room_id);
        g.door_nodes.push_back({node, room, di});
        g.room_doors[room].push_back(node);
        g.rooms_at_node[node].push_back(room);
    }

    // single connected component, checked up front so distance queries can
    // treat infinity as a logic error on validated plans
    std::vector<char> seen(g.nodes.size(), 0);
    std::vector<uint32_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        uint32_t n = stack.back();
        stack.pop_back();
        for (auto [eid, peer] : g.adjacency[n]) {
            if (!seen[peer]) {
                seen[peer] = 1;
                stack.push_back(peer);
            }
        }
    }
    std::string unreachable;
    for (uint32_t n = 0; n < g.nodes.size(); ++n) {
        if (!seen[n]) {
            unreachable += (unreachable.empty() ? "" : ", ") + std::to_string(n) + " at (" +
                           std::to_string(g.nodes[n].pos.x) + ", " + std::to_string(g.nodes[n].pos.y) + ")";
        }
    }
    if (!unreachable.empty())
        throw GraphError("walking graph is disconnected; unreachable nodes: " + unreachable);
    return g;
}

// Where a reader sits on the graph and which parts of the network it covers.
struct ReaderPlacement {
    GraphLocation loc;
    Vec2 pos;
    double range = 0.0;
    struct Interval {
        uint32_t edge;
        double lo, hi;
    };
    std::vector<Interval> covered; // Euclidean coverage, per edge
    double covered_length = 0.0;
};

inline std::vector<ReaderPlacement> compute_reader_placements(const FloorPlan& plan,
                                                              const WalkingGraph& g) {
    std::vector<ReaderPlacement> out(plan.readers.size());
    for (uint32_t ri = 0; ri < plan.readers.size(); ++ri) {
        const ReaderSpec& r = plan.readers[ri];
        uint32_t hw = plan.hallway_idx.at(r.hallway_id);
        ReaderPlacement& p = out[ri];
        p.loc = g.locate_on_hallway(hw, r.position);
        p.pos = plan.hallways[hw].point_at(r.position);
        p.range = r.activation_range;
        for (const GraphEdge& e : g.edges) {
            Vec2 a = g.nodes[e.u].pos, b = g.nodes[e.v].pos;
            Vec2 d = (b - a) * (1.0 / e.length);
            double tc = (p.pos - a).dot(d);
            double perp2 = (p.pos - (a + d * tc)).dot(p.pos - (a + d * tc));
            double r2 = p.range * p.range - perp2;
            if (r2 < 0.0) continue;
            double s = std::sqrt(r2);
            double lo = std::max(0.0, tc - s), hi = std::min(e.length, tc + s);
            if (hi - lo > 1e-12) {
                p.covered.push_back({e.id, lo, hi});
                p.covered_length += hi - lo;
            }
        }
    }
    return out;
}

} // namespace indoorsq
