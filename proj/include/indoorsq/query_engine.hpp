#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "indoorsq/anchor_index.hpp"
#include "indoorsq/pruning.hpp"
#include "indoorsq/result_set.hpp"
#include "indoorsq/site.hpp"

namespace indoorsq {

inline ResultSet evaluate_range_cells(const ApToObjIndex& index,
                                      const std::vector<RangeCell>& cells) {
    ResultSet out;
    for (const RangeCell& cell : cells) {
        ResultSet part;
        for (uint32_t a : cell.anchor_ids)
            for (const auto& [obj, p] : index.get(a)) part.add(obj, p);
        part.scale(cell.ratio);
        out += part;
    }
    return out;
}

// Snapshot range query: decompose the rectangle into hallway and room cells,
// sum indexed probabilities over each cell's anchors, scale by the covered
// width/area ratio, and merge.
inline ResultSet range_query(const Site& site, const ApToObjIndex& index, const Rect& q) {
    return evaluate_range_cells(index, decompose_range(site.grid(), site.plan(), site.graph(), q));
}

// Every anchor's network distance from q, ascending, ties by anchor id. Room
// anchors enter at their door projection's distance.
inline std::vector<std::pair<double, uint32_t>> knn_anchor_order(const Site& site,
                                                                 const GraphLocation& q) {
    const WalkingGraph& g = site.graph();
    std::vector<std::pair<double, uint32_t>> order;
    order.reserve(site.grid().anchors.size());
    for (const AnchorPoint& a : site.grid().anchors) {
        double d = a.loc.on_graph() ? g.shortest_network_distance(q, a.loc)
                                    : g.distance_to_node(q, a.door_node);
        order.push_back({d, a.id});
    }
    std::sort(order.begin(), order.end());
    return order;
}

struct KnnResult {
    ResultSet result;
    std::vector<uint32_t> visited; // anchors examined, in expansion order
    bool exhausted = false;        // index ran out before total probability reached k
};

// Expansion search: visit anchors in ascending network distance, accumulate
// per-object probability (capped at 1 against numerical drift), stop once the
// aggregate reaches k.
inline KnnResult knn_query(const Site& site, const ApToObjIndex& index, const GraphLocation& q,
                           uint32_t k) {
    KnnResult r;
    std::map<ObjectId, double> acc;
    double total = 0.0;
    for (auto [d, a] : knn_anchor_order(site, q)) {
        (void)d;
        r.visited.push_back(a);
        for (const auto& [obj, p] : index.get(a)) {
            double room = std::min(p, 1.0 - acc[obj]);
            acc[obj] += room;
            total += room;
        }
        if (total >= static_cast<double>(k) - 1e-12) break;
    }
    r.exhausted = total < static_cast<double>(k) - 1e-12;
    for (const auto& [obj, p] : acc) r.result.add(obj, p);
    return r;
}

inline KnnResult knn_query(const Site& site, const ApToObjIndex& index, Vec2 q, uint32_t k) {
    return knn_query(site, index, site.graph().project_to_graph(q), k);
}

// Readers that bound a monitored region: leaving the region means crossing
// one of their covered arcs (or walking into a dead end).
struct CriticalDeviceSet {
    std::vector<uint32_t> devices;  // boundary readers
    std::vector<uint32_t> interior; // readers covering the mapped query segments
    struct Span {
        uint32_t edge;
        double lo, hi;
    };
    std::vector<Span> region; // merged per-edge coverage of the bounded region
    bool dead_end = false;
};

namespace detail {

struct SeedSpan {
    uint32_t edge;
    double lo, hi;
};

// Marches outward from seed spans along the graph. Each ray stops at the
// first reader coverage whose far end lies at least min_dist from the ray
// start (so readers wholly inside a kNN ball are skipped), or at a dead end.
inline void expand_critical(const Site& site, const std::vector<SeedSpan>& seeds, double min_dist,
                            CriticalDeviceSet& out) {
    const WalkingGraph& g = site.graph();
    std::vector<CriticalDeviceSet::Span> spans;
    for (const SeedSpan& s : seeds) spans.push_back({s.edge, s.lo, s.hi});

    struct Ray {
        uint32_t edge;
        double from;
        int dir;
        double traveled;
    };
    std::vector<Ray> queue;
    std::set<uint32_t> expanded_nodes;
    std::set<uint32_t> devices;
    for (const SeedSpan& s : seeds) {
        queue.push_back({s.edge, s.lo, -1, 0.0});
        queue.push_back({s.edge, s.hi, +1, 0.0});
    }
    while (!queue.empty()) {
        Ray ray = queue.back();
        queue.pop_back();
        const GraphEdge& e = g.edges[ray.edge];
        double node_off = ray.dir > 0 ? e.length : 0.0;

        // nearest eligible reader coverage ahead on this edge
        double best_entry = 0.0, span_to = node_off;
        int best_reader = -1;
        for (uint32_t ri = 0; ri < site.readers().size(); ++ri) {
            for (const ReaderPlacement::Interval& iv : site.reader(ri).covered) {
                if (iv.edge != ray.edge) continue;
                double entry, exit;
                if (ray.dir > 0) {
                    if (iv.hi < ray.from - 1e-9) continue;
                    entry = std::max(iv.lo, ray.from);
                    exit = iv.hi;
                } else {
                    if (iv.lo > ray.from + 1e-9) continue;
                    entry = std::min(iv.hi, ray.from);
                    exit = iv.lo;
                }
                double entry_dist = ray.traveled + std::abs(entry - ray.from);
                double exit_dist = ray.traveled + std::abs(exit - ray.from);
                if (exit_dist < min_dist - 1e-9) continue; // wholly inside the ball
                if (best_reader < 0 || entry_dist < ray.traveled + std::abs(best_entry - ray.from) - 1e-12) {
                    best_reader = static_cast<int>(ri);
                    best_entry = entry;
                }
            }
        }
        if (best_reader >= 0) {
            devices.insert(static_cast<uint32_t>(best_reader));
            spans.push_back({ray.edge, std::min(ray.from, best_entry), std::max(ray.from, best_entry)});
            continue;
        }
        spans.push_back({ray.edge, std::min(ray.from, node_off), std::max(ray.from, node_off)});
        uint32_t node = ray.dir > 0 ? e.v : e.u;
        if (!expanded_nodes.insert(node).second) continue;
        double traveled = ray.traveled + std::abs(node_off - ray.from);
        bool onward = false;
        for (auto [eid, peer] : g.adjacency[node]) {
            if (eid == ray.edge) continue;
            const GraphEdge& ne = g.edges[eid];
            queue.push_back({eid, node == ne.u ? 0.0 : ne.length, node == ne.u ? +1 : -1, traveled});
            onward = true;
        }
        if (!onward) out.dead_end = true;
    }

    out.devices.assign(devices.begin(), devices.end());
    std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
        return a.edge != b.edge ? a.edge < b.edge : a.lo < b.lo;
    });
    for (const auto& s : spans) {
        if (s.hi - s.lo < 0 ) continue;
        if (!out.region.empty() && out.region.back().edge == s.edge &&
            s.lo <= out.region.back().hi + 1e-9)
            out.region.back().hi = std::max(out.region.back().hi, s.hi);
        else
            out.region.push_back(s);
    }
}

inline std::vector<SeedSpan> hallway_interval_to_spans(const WalkingGraph& g, uint32_t hallway,
                                                       double lo, double hi) {
    std::vector<SeedSpan> spans;
    for (const auto& [start, eid] : g.hallway_chain[hallway]) {
        const GraphEdge& e = g.edges[eid];
        double a = std::max(lo, start), b = std::min(hi, start + e.length);
        if (b < a - 1e-9) continue;
        double oa = a - start, ob = b - start;
        if (!g.chain_forward(hallway, eid)) {
            oa = e.length - (b - start);
            ob = e.length - (a - start);
        }
        spans.push_back({eid, std::min(oa, ob), std::max(oa, ob)});
    }
    return spans;
}

} // namespace detail

// Maps a range query onto the walking graph (room-only queries project to
// their door points; hallway overlaps extend to overlapped rooms' doors when
// that lengthens the segment), then expands to the surrounding readers.
inline CriticalDeviceSet critical_devices_for_range(const Site& site, const Rect& q) {
    const FloorPlan& plan = site.plan();
    const WalkingGraph& g = site.graph();
    CriticalDeviceSet out;

    struct Interval {
        bool present = false;
        double lo = 0.0, hi = 0.0;
    };
    std::vector<Interval> by_hallway(plan.hallways.size());
    for (uint32_t hi = 0; hi < plan.hallways.size(); ++hi) {
        const Hallway& h = plan.hallways[hi];
        Rect ov = q.intersect(h.rect());
        if (ov.area() <= 0.0) continue;
        double a = h.param_of({ov.x0, ov.y0});
        double b = h.param_of({ov.x1, ov.y1});
        by_hallway[hi] = {true, std::min(a, b), std::max(a, b)};
    }
    std::vector<std::pair<uint32_t, double>> door_points; // (hallway, param)
    for (uint32_t ri = 0; ri < plan.rooms.size(); ++ri) {
        if (q.intersect(plan.rooms[ri].rect).area() <= 0.0) continue;
        for (const std::string& did : plan.rooms[ri].door_ids) {
            const Door& d = plan.doors[plan.door_idx.at(did)];
            uint32_t hw = plan.hallway_idx.at(d.hallway_id);
            if (by_hallway[hw].present) {
                by_hallway[hw].lo = std::min(by_hallway[hw].lo, d.position);
                by_hallway[hw].hi = std::max(by_hallway[hw].hi, d.position);
            } else {
                door_points.push_back({hw, d.position});
            }
        }
    }

    std::vector<detail::SeedSpan> seeds;
    for (uint32_t hi = 0; hi < plan.hallways.size(); ++hi) {
        if (!by_hallway[hi].present) continue;
        auto spans = detail::hallway_interval_to_spans(g, hi, by_hallway[hi].lo, by_hallway[hi].hi);
        seeds.insert(seeds.end(), spans.begin(), spans.end());
    }
    for (auto [hw, param] : door_points) {
        GraphLocation loc = g.locate_on_hallway(hw, param);
        seeds.push_back({loc.edge, loc.offset, loc.offset});
    }
    if (seeds.empty()) return out;

    std::set<uint32_t> interior;
    for (uint32_t ri = 0; ri < site.readers().size(); ++ri)
        for (const ReaderPlacement::Interval& iv : site.reader(ri).covered)
            for (const detail::SeedSpan& s : seeds)
                if (iv.edge == s.edge && std::min(iv.hi, s.hi) - std::max(iv.lo, s.lo) > 1e-9)
                    interior.insert(ri);
    out.interior.assign(interior.begin(), interior.end());

    detail::expand_critical(site, seeds, 0.0, out);
    return out;
}

// Boundary readers for a kNN ball of the given network radius around q.
inline CriticalDeviceSet critical_devices_for_knn(const Site& site, const GraphLocation& q,
                                                  double radius) {
    CriticalDeviceSet out;
    std::vector<detail::SeedSpan> seeds{{q.edge, q.offset, q.offset}};
    detail::expand_critical(site, seeds, radius, out);
    return out;
}

// Runs a backend over a candidate list for one time step, committing beliefs
// into the shared index.
using FilterFn = std::function<void(const std::vector<ObjectId>&, double)>;

struct ContinuousRangeConfig {
    bool recompute_candidates_each_step = false;
    double drop_threshold = 1e-9;
    double u_max = kDefaultMaxSpeed;
};

// Continuous range query: candidate maintenance by critical-device crossings
// plus zero-probability cleanup, against a decomposition computed once.
class ContinuousRangeRunner {
public:
    ContinuousRangeRunner(const Site& site, const Rect& q, const ReadingStore& store,
                          ContinuousRangeConfig cfg = {})
        : site_(site), q_(q), cfg_(cfg),
          cells_(decompose_range(site.grid(), site.plan(), site.graph(), q)),
          critical_(critical_devices_for_range(site, q)) {
        for (uint32_t d : critical_.devices)
            for (ObjectId o : store.objects_at(d)) candidates_.insert(o);
        for (uint32_t d : critical_.interior)
            for (ObjectId o : store.objects_at(d)) candidates_.insert(o);
    }

    // `events` are this second's raw readings, already ingested into `store`.
    const ResultSet& step(const ReadingStore& store, const std::vector<RawReading>& events,
                          double t, const FilterFn& filter, const ApToObjIndex& index) {
        if (cfg_.recompute_candidates_each_step) {
            auto fresh = prune_range_candidates(site_, store, {&q_, 1}, t, cfg_.u_max);
            candidates_ = std::set<ObjectId>(fresh.begin(), fresh.end());
        } else {
            for (const RawReading& e : events) {
                auto it = last_device_.find(e.object);
                bool run_start = it == last_device_.end() || it->second != e.reader;
                last_device_[e.object] = e.reader;
                if (!run_start) continue;
                if (!std::binary_search(critical_.devices.begin(), critical_.devices.end(),
                                        e.reader))
                    continue;
                if (!candidates_.erase(e.object)) candidates_.insert(e.object); // crossing toggles
            }
            for (auto it = candidates_.begin(); it != candidates_.end();) {
                if (filtered_last_.count(*it) && last_result_.prob(*it) < cfg_.drop_threshold)
                    it = candidates_.erase(it);
                else
                    ++it;
            }
        }
        std::vector<ObjectId> c(candidates_.begin(), candidates_.end());
        filter(c, t);
        filtered_last_ = candidates_;
        last_result_ = evaluate_range_cells(index, cells_);
        return last_result_;
    }

    const CriticalDeviceSet& critical() const { return critical_; }
    const std::set<ObjectId>& candidates() const { return candidates_; }
    const ResultSet& last_result() const { return last_result_; }

private:
    const Site& site_;
    Rect q_;
    ContinuousRangeConfig cfg_;
    std::vector<RangeCell> cells_;
    CriticalDeviceSet critical_;
    std::set<ObjectId> candidates_;
    std::set<ObjectId> filtered_last_;
    std::map<ObjectId, uint32_t> last_device_;
    ResultSet last_result_;
};

struct ContinuousKnnConfig {
    uint32_t k = 3;
    uint32_t y = 2; // candidate buffer beyond k
    bool recompute_each_step = false;
    double u_max = kDefaultMaxSpeed;
};

// Continuous kNN: keeps k+y candidates, toggles them on boundary crossings,
// and recomputes candidates plus critical devices when fewer than k remain.
class ContinuousKnnRunner {
public:
    ContinuousKnnRunner(const Site& site, const GraphLocation& q, const ReadingStore& store,
                        double t0, ContinuousKnnConfig cfg = {})
        : site_(site), q_(q), cfg_(cfg) {
        recompute(store, t0);
    }

    const KnnResult& step(const ReadingStore& store, const std::vector<RawReading>& events,
                          double t, const FilterFn& filter, const ApToObjIndex& index) {
        if (cfg_.recompute_each_step) {
            recompute(store, t);
        } else {
            for (const RawReading& e : events) {
                auto it = last_device_.find(e.object);
                bool run_start = it == last_device_.end() || it->second != e.reader;
                last_device_[e.object] = e.reader;
                if (!run_start) continue;
                if (!std::binary_search(critical_.devices.begin(), critical_.devices.end(),
                                        e.reader))
                    continue;
                if (!candidates_.erase(e.object)) candidates_.insert(e.object);
            }
            if (candidates_.size() < cfg_.k) recompute(store, t);
        }
        std::vector<ObjectId> c(candidates_.begin(), candidates_.end());
        filter(c, t);
        last_result_ = knn_query(site_, index, q_, cfg_.k);
        return last_result_;
    }

    const CriticalDeviceSet& critical() const { return critical_; }
    const std::set<ObjectId>& candidates() const { return candidates_; }
    uint32_t recompute_count() const { return recomputes_; }

private:
    void recompute(const ReadingStore& store, double t) {
        std::vector<KnnBounds> bounds;
        auto kept = prune_knn_candidates(site_, store, q_, cfg_.k + cfg_.y, t, cfg_.u_max, &bounds);
        candidates_ = std::set<ObjectId>(kept.begin(), kept.end());
        double radius = 0.0;
        if (!bounds.empty()) {
            std::vector<double> longest;
            for (const KnnBounds& b : bounds) longest.push_back(b.longest);
            size_t count = std::min<size_t>(cfg_.k + cfg_.y, longest.size());
            std::nth_element(longest.begin(), longest.begin() + (count - 1), longest.end());
            radius = longest[count - 1];
        }
        critical_ = critical_devices_for_knn(site_, q_, radius);
        ++recomputes_;
    }

    const Site& site_;
    GraphLocation q_;
    ContinuousKnnConfig cfg_;
    CriticalDeviceSet critical_;
    std::set<ObjectId> candidates_;
    std::map<ObjectId, uint32_t> last_device_;
    KnnResult last_result_;
    uint32_t recomputes_ = 0;
};

} // namespace indoorsq
