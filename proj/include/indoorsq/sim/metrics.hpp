#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "indoorsq/result_set.hpp"
#include "indoorsq/sim/trace.hpp"

namespace indoorsq {

inline constexpr double kDivergenceFloor = 1e-6;

inline std::set<ObjectId> ground_truth_range(const std::vector<Trajectory>& traces, const Rect& q,
                                             uint32_t t) {
    std::set<ObjectId> out;
    for (const Trajectory& tr : traces)
        if (q.contains(tr.points.at(t).pos)) out.insert(tr.object);
    return out;
}

// k objects nearest to q in network distance at second t, ties by object id.
inline std::set<ObjectId> ground_truth_knn(const Site& site, const std::vector<Trajectory>& traces,
                                           const GraphLocation& q, uint32_t k, uint32_t t) {
    std::vector<std::pair<double, ObjectId>> order;
    for (const Trajectory& tr : traces)
        order.push_back({site.graph().shortest_network_distance(q, tr.points.at(t).loc), tr.object});
    std::sort(order.begin(), order.end());
    std::set<ObjectId> out;
    for (size_t i = 0; i < order.size() && i < k; ++i) out.insert(order[i].second);
    return out;
}

// Information loss over the true result objects: sum of -ln(predicted
// probability), floored at kDivergenceFloor so misses stay finite.
inline double cover_divergence(const std::set<ObjectId>& truth, const ResultSet& predicted) {
    double total = 0.0;
    for (ObjectId o : truth) {
        double p = std::clamp(predicted.prob(o), kDivergenceFloor, 1.0);
        total += -std::log(p);
    }
    return total;
}

inline double hit_rate(const std::set<ObjectId>& truth, const ResultSet& predicted) {
    size_t hits = 0;
    for (ObjectId o : truth)
        if (predicted.contains(o)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// Keeps the n highest-probability entries (ties toward lower object id); used
// to score the uniform baseline, which has no expansion cutoff of its own.
inline ResultSet top_n_by_probability(const ResultSet& rs, size_t n) {
    std::vector<std::pair<double, ObjectId>> order;
    for (const auto& [o, p] : rs) order.push_back({-p, o});
    std::sort(order.begin(), order.end());
    ResultSet out;
    for (size_t i = 0; i < order.size() && i < n; ++i)
        out.add(order[i].second, -order[i].first);
    return out;
}

} // namespace indoorsq
