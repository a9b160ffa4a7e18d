#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "indoorsq/floorplan.hpp"
#include "indoorsq/walking_graph.hpp"

namespace indoorsq {

struct AnchorPoint {
    uint32_t id = 0;
    GraphLocation loc;
    Vec2 pos;
    int32_t room = -1;              // >= 0 for room anchors
    uint32_t door_node = UINT32_MAX; // room anchors: network entry point
};

// Discretization of the floor: anchors every `spacing` meters along each edge
// (both endpoints always included), plus one anchor per (room, door) carrying
// in-room probability mass at the door's network position.
struct AnchorGrid {
    double spacing = 1.0;
    std::vector<AnchorPoint> anchors;
    std::vector<uint32_t> edge_first;           // per edge: first anchor id
    std::vector<uint32_t> edge_count;           // per edge: anchor count (contiguous ids)
    std::vector<std::vector<uint32_t>> room_anchors; // per room: anchor ids
    uint32_t edge_anchor_total = 0;

    std::span<const AnchorPoint> on_edge(uint32_t e) const {
        return {anchors.data() + edge_first[e], edge_count[e]};
    }

    uint32_t nearest_on_edge(uint32_t e, double offset) const {
        auto span = on_edge(e);
        uint32_t best = span.front().id;
        double bd = std::abs(span.front().loc.offset - offset);
        for (const AnchorPoint& a : span) {
            double d = std::abs(a.loc.offset - offset);
            if (d < bd - 1e-12) {
                bd = d;
                best = a.id;
            }
        }
        return best;
    }

    uint32_t room_anchor_for_door(uint32_t room, uint32_t door_node) const {
        for (uint32_t id : room_anchors[room])
            if (anchors[id].door_node == door_node) return id;
        return room_anchors[room].front();
    }
};

inline AnchorGrid generate_anchor_points(const FloorPlan& plan, const WalkingGraph& g,
                                         double spacing) {
    AnchorGrid grid;
    grid.spacing = spacing;
    grid.edge_first.resize(g.edges.size());
    grid.edge_count.resize(g.edges.size());
    for (const GraphEdge& e : g.edges) {
        grid.edge_first[e.id] = static_cast<uint32_t>(grid.anchors.size());
        Vec2 a = g.nodes[e.u].pos, b = g.nodes[e.v].pos;
        uint32_t n = 0;
        for (double off = 0.0; off <= e.length + 1e-9; off += spacing) {
            double o = std::min(off, e.length);
            AnchorPoint ap;
            ap.id = static_cast<uint32_t>(grid.anchors.size());
            ap.loc = GraphLocation::on_edge(e.id, o);
            ap.pos = a + (b - a) * (o / e.length);
            grid.anchors.push_back(ap);
            ++n;
        }
        // keep the far endpoint when the last full step fell short of it
        if (grid.anchors.back().loc.offset < e.length - 1e-9) {
            AnchorPoint ap;
            ap.id = static_cast<uint32_t>(grid.anchors.size());
            ap.loc = GraphLocation::on_edge(e.id, e.length);
            ap.pos = b;
            grid.anchors.push_back(ap);
            ++n;
        }
        grid.edge_count[e.id] = n;
    }
    grid.edge_anchor_total = static_cast<uint32_t>(grid.anchors.size());

    grid.room_anchors.resize(plan.rooms.size());
    for (const DoorNode& dn : g.door_nodes) {
        AnchorPoint ap;
        ap.id = static_cast<uint32_t>(grid.anchors.size());
        ap.loc = GraphLocation::in_room(dn.room);
        ap.pos = g.nodes[dn.node].pos;
        ap.room = static_cast<int32_t>(dn.room);
        ap.door_node = dn.node;
        grid.room_anchors[dn.room].push_back(ap.id);
        grid.anchors.push_back(ap);
    }
    return grid;
}

// One piece of a range query after decomposition: either a slice of hallway
// (scaled by covered width) or a slice of room (scaled by covered area).
struct RangeCell {
    enum class Type : uint8_t { Hallway, Room };
    Type type;
    uint32_t ref; // hallway or room index
    double ratio; // in (0, 1]
    std::vector<uint32_t> anchor_ids;
};

inline std::vector<RangeCell> decompose_range(const AnchorGrid& grid, const FloorPlan& plan,
                                              const WalkingGraph& g, const Rect& q) {
    std::vector<RangeCell> cells;
    for (uint32_t hi = 0; hi < plan.hallways.size(); ++hi) {
        const Hallway& h = plan.hallways[hi];
        Rect ov = q.intersect(h.rect());
        if (ov.area() <= 0.0) continue;
        RangeCell cell;
        cell.type = RangeCell::Type::Hallway;
        cell.ref = hi;
        double cross = h.horizontal() ? ov.height() : ov.width();
        cell.ratio = cross / h.width;
        double lo = h.param_of({ov.x0, ov.y0});
        double hi_t = h.param_of({ov.x1, ov.y1});
        if (lo > hi_t) std::swap(lo, hi_t);
        for (const auto& [start, eid] : g.hallway_chain[hi]) {
            (void)start;
            for (const AnchorPoint& ap : grid.on_edge(eid)) {
                double t = h.param_of(ap.pos);
                if (t >= lo - 1e-9 && t <= hi_t + 1e-9) cell.anchor_ids.push_back(ap.id);
            }
        }
        cells.push_back(std::move(cell));
    }
    for (uint32_t ri = 0; ri < plan.rooms.size(); ++ri) {
        const Room& room = plan.rooms[ri];
        Rect ov = q.intersect(room.rect);
        if (ov.area() <= 0.0) continue;
        RangeCell cell;
        cell.type = RangeCell::Type::Room;
        cell.ref = ri;
        cell.ratio = ov.area() / room.rect.area();
        cell.anchor_ids = grid.room_anchors[ri];
        cells.push_back(std::move(cell));
    }
    return cells;
}

} // namespace indoorsq
