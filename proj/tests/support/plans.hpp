#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "indoorsq/site.hpp"

namespace testsupport {

using nlohmann::json;

// Small plan builder so tests can assemble geometry without JSON strings.
struct PlanBuilder {
    json j{{"hallways", json::array()},
           {"rooms", json::array()},
           {"doors", json::array()},
           {"readers", json::array()}};
    int room_n = 0;

    PlanBuilder& hallway(const std::string& id, double x0, double y0, double x1, double y1,
                         double width = 2.0) {
        j["hallways"].push_back({{"id", id}, {"x0", x0}, {"y0", y0}, {"x1", x1}, {"y1", y1},
                                 {"width", width}});
        return *this;
    }

    // rectangular room with one door onto `hallway_id` at `position`
    PlanBuilder& room(const std::string& id, double x, double y, double w, double h,
                      const std::string& hallway_id, double position) {
        std::string did = "door_" + id;
        j["rooms"].push_back({{"id", id}, {"x", x}, {"y", y}, {"w", w}, {"h", h},
                              {"doors", {did}}});
        j["doors"].push_back({{"id", did}, {"room_id", id}, {"hallway_id", hallway_id},
                              {"position", position}});
        return *this;
    }

    PlanBuilder& reader(const std::string& id, const std::string& hallway_id, double position,
                        double range = 2.0) {
        j["readers"].push_back({{"id", id}, {"hallway_id", hallway_id}, {"position", position},
                                {"activation_range", range}});
        return *this;
    }

    indoorsq::FloorPlan plan() const { return indoorsq::parse_floorplan(j.dump()); }
    std::unique_ptr<indoorsq::Site> site(double spacing = 1.0) const {
        return indoorsq::Site::build(plan(), spacing);
    }
};

// straight 40 m corridor, readers at 5 and 35
inline PlanBuilder corridor_plan() {
    PlanBuilder b;
    b.hallway("H", 0, 0, 40, 0);
    b.reader("dA", "H", 5.0);
    b.reader("dB", "H", 35.0);
    return b;
}

// two perpendicular hallways crossing mid-span
inline PlanBuilder cross_plan() {
    PlanBuilder b;
    b.hallway("HX", 0, 0, 20, 0);
    b.hallway("HY", 10, -10, 10, 10);
    return b;
}

// square loop, two equal-length routes between opposite corners
inline PlanBuilder loop_plan() {
    PlanBuilder b;
    b.hallway("E", 20, 0, 20, 20);
    b.hallway("N", 0, 20, 20, 20);
    b.hallway("S", 0, 0, 20, 0);
    b.hallway("W", 0, 0, 0, 20);
    return b;
}

inline std::string bundled_plan_path() {
    return std::string(INDOORSQ_DATA_DIR) + "/office_floor.json";
}

// ---- independent oracles ----

// Floyd-Warshall over an explicit node set; used to cross-check Dijkstra.
struct FwOracle {
    std::vector<std::vector<double>> d;

    explicit FwOracle(size_t n) : d(n, std::vector<double>(n, 1e18)) {
        for (size_t i = 0; i < n; ++i) d[i][i] = 0.0;
    }
    void edge(size_t a, size_t b, double w) {
        d[a][b] = std::min(d[a][b], w);
        d[b][a] = std::min(d[b][a], w);
    }
    void solve() {
        size_t n = d.size();
        for (size_t k = 0; k < n; ++k)
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j)
                    d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
};

// Distance between two on-edge locations computed by Floyd-Warshall over the
// graph's nodes augmented with the two query points (edges split at them).
inline double fw_point_distance(const indoorsq::WalkingGraph& g, const indoorsq::GraphLocation& a,
                                const indoorsq::GraphLocation& b) {
    using namespace indoorsq;
    size_t n = g.nodes.size();
    FwOracle fw(n + 2);
    size_t ia = n, ib = n + 1;
    for (const GraphEdge& e : g.edges) {
        std::vector<std::pair<double, size_t>> splits; // (offset, oracle node)
        if (a.on_graph() && a.edge == e.id) splits.push_back({a.offset, ia});
        if (b.on_graph() && b.edge == e.id) splits.push_back({b.offset, ib});
        std::sort(splits.begin(), splits.end());
        size_t prev = e.u;
        double prev_off = 0.0;
        for (auto [off, node] : splits) {
            fw.edge(prev, node, off - prev_off);
            prev = node;
            prev_off = off;
        }
        fw.edge(prev, e.v, e.length - prev_off);
    }
    fw.solve();
    return fw.d[ia][ib];
}

// Sutherland-Hodgman rectangle clip + shoelace area: independent check of the
// closed-form rect intersection used by range decomposition.
inline double clip_area(const indoorsq::Rect& subject, const indoorsq::Rect& clip) {
    using P = std::pair<double, double>;
    std::vector<P> poly{{subject.x0, subject.y0}, {subject.x1, subject.y0},
                        {subject.x1, subject.y1}, {subject.x0, subject.y1}};
    auto clip_halfplane = [&](std::vector<P> in, auto inside, auto intersect) {
        std::vector<P> out;
        for (size_t i = 0; i < in.size(); ++i) {
            P cur = in[i], prev = in[(i + in.size() - 1) % in.size()];
            bool cin = inside(cur), pin = inside(prev);
            if (cin) {
                if (!pin) out.push_back(intersect(prev, cur));
                out.push_back(cur);
            } else if (pin) {
                out.push_back(intersect(prev, cur));
            }
        }
        return out;
    };
    auto lerp_x = [](P a, P b, double x) {
        double t = (x - a.first) / (b.first - a.first);
        return P{x, a.second + t * (b.second - a.second)};
    };
    auto lerp_y = [](P a, P b, double y) {
        double t = (y - a.second) / (b.second - a.second);
        return P{a.first + t * (b.first - a.first), y};
    };
    poly = clip_halfplane(poly, [&](P p) { return p.first >= clip.x0; },
                          [&](P a, P b) { return lerp_x(a, b, clip.x0); });
    if (poly.empty()) return 0.0;
    poly = clip_halfplane(poly, [&](P p) { return p.first <= clip.x1; },
                          [&](P a, P b) { return lerp_x(a, b, clip.x1); });
    if (poly.empty()) return 0.0;
    poly = clip_halfplane(poly, [&](P p) { return p.second >= clip.y0; },
                          [&](P a, P b) { return lerp_y(a, b, clip.y0); });
    if (poly.empty()) return 0.0;
    poly = clip_halfplane(poly, [&](P p) { return p.second <= clip.y1; },
                          [&](P a, P b) { return lerp_y(a, b, clip.y1); });
    if (poly.empty()) return 0.0;
    double area2 = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        P a = poly[i], b = poly[(i + 1) % poly.size()];
        area2 += a.first * b.second - b.first * a.second;
    }
    return std::abs(area2) / 2.0;
}

// anchors an edge of length L should carry, by the spec of the spacing rule
inline uint32_t expected_edge_anchor_count(double length, double spacing) {
    uint32_t full = static_cast<uint32_t>(std::floor(length / spacing + 1e-9));
    double covered = full * spacing;
    return full + 1 + (covered < length - 1e-9 ? 1 : 0);
}

} // namespace testsupport
