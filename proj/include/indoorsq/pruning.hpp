#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "indoorsq/reading_store.hpp"
#include "indoorsq/site.hpp"

namespace indoorsq {

inline constexpr double kDefaultMaxSpeed = 1.5; // m/s

// Where an object can possibly be, given its last detection: a disc around the
// last reader grown by maximum walking speed.
struct UncertainRegion {
    ObjectId object = 0;
    uint32_t reader = 0;
    double t_last = 0.0;
    Vec2 center;
    double radius = 0.0;
};

inline std::optional<UncertainRegion> uncertain_region(const Site& site, const ReadingStore& store,
                                                       ObjectId obj, double t_current,
                                                       double u_max = kDefaultMaxSpeed) {
    auto last = store.latest_detection(obj);
    if (!last) return std::nullopt;
    auto [reader, t_last] = *last;
    const ReaderPlacement& rp = site.reader(reader);
    UncertainRegion ur;
    ur.object = obj;
    ur.reader = reader;
    ur.t_last = t_last;
    ur.center = rp.pos;
    ur.radius = u_max * std::max(0.0, t_current - t_last) + rp.range;
    return ur;
}

// Objects whose uncertain region meets at least one query rectangle. Euclidean
// test only; the network-aware bound below is reserved for kNN.
inline std::vector<ObjectId> prune_range_candidates(const Site& site, const ReadingStore& store,
                                                    std::span<const Rect> queries, double t_current,
                                                    double u_max = kDefaultMaxSpeed) {
    std::vector<ObjectId> out;
    for (ObjectId obj : store.detected_objects()) {
        auto ur = uncertain_region(site, store, obj, t_current, u_max);
        if (!ur) continue;
        for (const Rect& q : queries) {
            if (circle_intersects_rect(ur->center, ur->radius, q)) {
                out.push_back(obj);
                break;
            }
        }
    }
    return out;
}

// Network-distance bounds from query point q to anywhere the object can be.
struct KnnBounds {
    ObjectId object = 0;
    double shortest = 0.0;
    double longest = 0.0;
};

inline std::optional<KnnBounds> knn_bounds(const Site& site, const ReadingStore& store,
                                           const GraphLocation& q, ObjectId obj, double t_current,
                                           double u_max = kDefaultMaxSpeed) {
    auto last = store.latest_detection(obj);
    if (!last) return std::nullopt;
    auto [reader, t_last] = *last;
    const ReaderPlacement& rp = site.reader(reader);
    double radius = u_max * std::max(0.0, t_current - t_last) + rp.range;
    double d = site.graph().shortest_network_distance(q, rp.loc);
    KnnBounds b;
    b.object = obj;
    b.shortest = std::max(0.0, d - radius);
    b.longest = d + radius;
    return b;
}

// Keep objects whose shortest possible distance does not exceed the k-th
// smallest guaranteed distance. `count` is normally k, or k+y when a
// continuous query wants buffered candidates.
inline std::vector<ObjectId> prune_knn_candidates(const Site& site, const ReadingStore& store,
                                                  const GraphLocation& q, uint32_t count,
                                                  double t_current,
                                                  double u_max = kDefaultMaxSpeed,
                                                  std::vector<KnnBounds>* bounds_out = nullptr) {
    std::vector<KnnBounds> bounds;
    for (ObjectId obj : store.detected_objects()) {
        auto b = knn_bounds(site, store, q, obj, t_current, u_max);
        if (b) bounds.push_back(*b);
    }
    std::vector<ObjectId> out;
    if (bounds.size() <= count) {
        for (const KnnBounds& b : bounds) out.push_back(b.object);
    } else {
        std::vector<double> longest;
        longest.reserve(bounds.size());
        for (const KnnBounds& b : bounds) longest.push_back(b.longest);
        std::nth_element(longest.begin(), longest.begin() + (count - 1), longest.end());
        double fence = longest[count - 1];
        for (const KnnBounds& b : bounds)
            if (b.shortest <= fence + 1e-12) out.push_back(b.object);
    }
    std::sort(out.begin(), out.end());
    if (bounds_out) *bounds_out = std::move(bounds);
    return out;
}

} // namespace indoorsq
