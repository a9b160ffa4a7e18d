#pragma once

#include <vector>

#include "indoorsq/anchor_index.hpp"
#include "indoorsq/pruning.hpp"
#include "indoorsq/query_engine.hpp"
#include "indoorsq/reading_store.hpp"
#include "indoorsq/site.hpp"

namespace indoorsq {

// Symbolic-model stand-in: each candidate's mass spreads uniformly over every
// anchor reachable from its last detecting reader within
// u_max * elapsed + activation range of network distance.
inline std::vector<std::pair<uint32_t, double>> uniform_reachable(const Site& site, uint32_t reader,
                                                                  double radius) {
    std::vector<std::pair<uint32_t, double>> out;
    for (auto [d, a] : knn_anchor_order(site, site.reader(reader).loc)) {
        if (d > radius + 1e-9) break;
        out.push_back({a, 0.0});
    }
    for (auto& [a, p] : out) p = 1.0 / static_cast<double>(out.size());
    return out;
}

inline void uniform_baseline(const Site& site, const ReadingStore& store,
                             const std::vector<ObjectId>& candidates, double t_current,
                             ApToObjIndex& index, double u_max = kDefaultMaxSpeed) {
    for (ObjectId obj : candidates) {
        auto last = store.latest_detection(obj);
        if (!last) continue;
        auto [reader, t_last] = *last;
        double radius = u_max * std::max(0.0, t_current - t_last) + site.reader(reader).range;
        auto dist = uniform_reachable(site, reader, radius);
        if (!dist.empty()) index.commit_object(obj, dist);
    }
}

} // namespace indoorsq
