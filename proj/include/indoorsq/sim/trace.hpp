#pragma once

#include <cstdint>
#include <vector>

#include "indoorsq/reading_store.hpp"
#include "indoorsq/rng.hpp"
#include "indoorsq/site.hpp"

namespace indoorsq {

struct TracePoint {
    GraphLocation loc;
    Vec2 pos;
};

struct Trajectory {
    ObjectId object = 0;
    std::vector<TracePoint> points;  // one per integer second, duration + 1 entries
    std::vector<double> leg_speeds;  // speed drawn for each leg started
};

struct TraceConfig {
    uint32_t n_objects = 50;
    uint32_t duration = 300;
    double speed_mean = 1.0;
    double speed_std = 0.1;
    double speed_min = 0.1;
    double speed_max = 1.5;
};

namespace detail {

// Shortest node path by greedy descent on the distance field; ties resolved
// toward the lowest edge id so paths are stable.
inline std::vector<uint32_t> shortest_node_path(const WalkingGraph& g, uint32_t from,
                                                uint32_t dest) {
    const std::vector<double>& dist = g.node_distances(dest);
    std::vector<uint32_t> path{from};
    uint32_t cur = from;
    while (cur != dest) {
        uint32_t best_edge = UINT32_MAX, best_peer = UINT32_MAX;
        double best = kUnreachable;
        for (auto [eid, peer] : g.adjacency[cur]) {
            double cand = g.edges[eid].length + dist[peer];
            if (cand < best - 1e-12 || (cand < best + 1e-12 && eid < best_edge)) {
                best = cand;
                best_edge = eid;
                best_peer = peer;
            }
        }
        cur = best_peer;
        path.push_back(cur);
    }
    return path;
}

inline uint32_t edge_between(const WalkingGraph& g, uint32_t u, uint32_t v) {
    for (auto [eid, peer] : g.adjacency[u])
        if (peer == v) return eid;
    return UINT32_MAX;
}

// Continuous walk state along a node path.
struct LegWalker {
    const WalkingGraph* g = nullptr;
    std::vector<uint32_t> path;
    size_t seg = 0;      // walking path[seg] -> path[seg+1]
    double seg_off = 0;  // meters from path[seg]

    bool done() const { return seg + 1 >= path.size(); }

    double seg_length() const {
        return g->edges[edge_between(*g, path[seg], path[seg + 1])].length;
    }

    GraphLocation location() const {
        uint32_t u, v;
        double off;
        if (done()) {
            u = path[path.size() - 2];
            v = path.back();
            off = g->edges[edge_between(*g, u, v)].length;
        } else {
            u = path[seg];
            v = path[seg + 1];
            off = seg_off;
        }
        uint32_t eid = edge_between(*g, u, v);
        const GraphEdge& e = g->edges[eid];
        return GraphLocation::on_edge(eid, e.u == u ? off : e.length - off);
    }

    // Walk up to `dist` meters; returns the distance actually walked.
    double advance(double dist) {
        double walked = 0.0;
        while (dist > 1e-12 && !done()) {
            double room = seg_length() - seg_off;
            if (dist < room - 1e-12) {
                seg_off += dist;
                walked += dist;
                return walked;
            }
            walked += room;
            dist -= room;
            ++seg;
            seg_off = 0.0;
        }
        return walked;
    }
};

} // namespace detail

// Objects repeatedly pick a uniform random destination node and walk the
// shortest path to it at a per-leg speed drawn from a truncated normal.
// Movement is continuous in the no-detour sense: a destination whose path
// would immediately retrace the hallway just walked is redrawn, so objects
// keep flowing instead of bouncing back and forth at a node.
inline std::vector<Trajectory> generate_traces(const Site& site, const TraceConfig& cfg,
                                               uint64_t seed) {
    const WalkingGraph& g = site.graph();
    uint32_t n_nodes = static_cast<uint32_t>(g.nodes.size());
    std::vector<Trajectory> out;
    out.reserve(cfg.n_objects);
    for (uint32_t obj = 0; obj < cfg.n_objects; ++obj) {
        Rng rng = Rng::stream(seed, "trace", obj);
        Trajectory tr;
        tr.object = obj;
        uint32_t node = rng.uniform_int(n_nodes);

        detail::LegWalker walker{&g, {node}, 0, 0.0}; // placeholder until the first leg
        double speed = 1.0;
        auto start_leg = [&]() {
            uint32_t at = walker.path.back();
            uint32_t prev = walker.path.size() > 1 ? walker.path[walker.path.size() - 2]
                                                   : UINT32_MAX;
            std::vector<uint32_t> allowed;
            for (uint32_t n = 0; n < n_nodes; ++n) {
                if (n == at) continue;
                if (prev != UINT32_MAX &&
                    detail::shortest_node_path(g, at, n)[1] == prev) continue;
                allowed.push_back(n);
            }
            if (allowed.empty())
                for (uint32_t n = 0; n < n_nodes; ++n)
                    if (n != at) allowed.push_back(n); // dead end, reversal unavoidable
            uint32_t dest = allowed[rng.uniform_int(static_cast<uint32_t>(allowed.size()))];
            walker = detail::LegWalker{&g, detail::shortest_node_path(g, at, dest), 0, 0.0};
            speed = rng.normal(cfg.speed_mean, cfg.speed_std);
            while (speed < cfg.speed_min || speed > cfg.speed_max)
                speed = rng.normal(cfg.speed_mean, cfg.speed_std);
            tr.leg_speeds.push_back(speed);
        };
        auto record = [&]() {
            GraphLocation loc = walker.location();
            tr.points.push_back({loc, g.point_at(loc)});
        };

        start_leg();
        record();
        for (uint32_t t = 1; t <= cfg.duration; ++t) {
            double remaining = 1.0;
            while (remaining > 1e-9) {
                if (walker.done()) start_leg();
                double walked = walker.advance(speed * remaining);
                remaining -= walked / speed;
            }
            record();
        }
        out.push_back(std::move(tr));
    }
    return out;
}

// Per second, each object inside a reader's Euclidean activation range is
// reported with probability p_detect. Stream comes out sorted by
// (timestamp, object, reader).
inline std::vector<RawReading> generate_readings(const Site& site,
                                                 const std::vector<Trajectory>& traces,
                                                 double p_detect, uint64_t seed) {
    std::vector<RawReading> out;
    std::vector<Rng> rngs;
    rngs.reserve(traces.size());
    for (const Trajectory& tr : traces) rngs.push_back(Rng::stream(seed, "read", tr.object));
    uint32_t duration = traces.empty() ? 0 : static_cast<uint32_t>(traces[0].points.size()) - 1;
    for (uint32_t t = 0; t <= duration; ++t) {
        for (size_t oi = 0; oi < traces.size(); ++oi) {
            Vec2 pos = traces[oi].points[t].pos;
            for (uint32_t ri = 0; ri < site.readers().size(); ++ri) {
                const ReaderPlacement& rp = site.reader(ri);
                if (pos.dist(rp.pos) > rp.range) continue;
                if (rngs[oi].uniform() < p_detect)
                    out.push_back({static_cast<double>(t), traces[oi].object, ri});
            }
        }
    }
    return out;
}

} // namespace indoorsq
