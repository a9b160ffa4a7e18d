#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "indoorsq/reading_store.hpp"

namespace indoorsq {

struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Anchor -> {(object, probability)} hash table. Writers commit one object at a
// time; each commit atomically replaces that object's previous entries and
// bumps the generation counter. The pipeline contract is phase-based: all
// commits for a time step happen before any query reads the new generation,
// and readers never interleave with a commit for the same generation.
class ApToObjIndex {
public:
    static constexpr double kMinProbability = 1e-9;

    explicit ApToObjIndex(uint32_t n_anchors) : by_anchor_(n_anchors) {}

    void commit_object(ObjectId obj, const std::vector<std::pair<uint32_t, double>>& entries) {
        double total = 0.0;
        for (const auto& [anchor, p] : entries) {
            if (anchor >= by_anchor_.size())
                throw IndexError("commit references unknown anchor " + std::to_string(anchor));
            if (!(p >= 0.0) || p > 1.0 + 1e-9)
                throw IndexError("probability " + std::to_string(p) + " out of range for object " +
                                 std::to_string(obj));
            total += p;
        }
        if (total > 1.0 + 1e-6)
            throw IndexError("object " + std::to_string(obj) + " total mass " + std::to_string(total) +
                             " exceeds 1");
        remove_object(obj);
        auto& anchors = obj_anchors_[obj];
        for (const auto& [anchor, p] : entries) {
            if (p < kMinProbability) continue;
            auto& list = by_anchor_[anchor];
            auto it = std::lower_bound(list.begin(), list.end(), obj,
                                       [](const auto& e, ObjectId o) { return e.first < o; });
            if (it != list.end() && it->first == obj)
                it->second += p; // duplicate anchor in one commit
            else
                list.insert(it, {obj, std::min(p, 1.0)});
            anchors.push_back(anchor);
        }
        if (anchors.empty()) obj_anchors_.erase(obj);
        ++generation_;
    }

    const std::vector<std::pair<ObjectId, double>>& get(uint32_t anchor) const {
        if (anchor >= by_anchor_.size())
            throw IndexError("get references unknown anchor " + std::to_string(anchor));
        return by_anchor_[anchor];
    }

    double object_total(ObjectId obj) const {
        auto it = obj_anchors_.find(obj);
        if (it == obj_anchors_.end()) return 0.0;
        double total = 0.0;
        for (uint32_t a : it->second)
            for (const auto& [o, p] : by_anchor_[a])
                if (o == obj) total += p;
        return total;
    }

    std::vector<ObjectId> objects() const {
        std::vector<ObjectId> out;
        out.reserve(obj_anchors_.size());
        for (const auto& [obj, _] : obj_anchors_) out.push_back(obj);
        std::sort(out.begin(), out.end());
        return out;
    }

    void clear() {
        for (auto& list : by_anchor_) list.clear();
        obj_anchors_.clear();
        ++generation_;
    }

    uint64_t generation() const { return generation_; }
    uint32_t anchor_count() const { return static_cast<uint32_t>(by_anchor_.size()); }

private:
    void remove_object(ObjectId obj) {
        auto it = obj_anchors_.find(obj);
        if (it == obj_anchors_.end()) return;
        for (uint32_t a : it->second) {
            auto& list = by_anchor_[a];
            list.erase(std::remove_if(list.begin(), list.end(),
                                      [obj](const auto& e) { return e.first == obj; }),
                       list.end());
        }
        obj_anchors_.erase(it);
    }

    std::vector<std::vector<std::pair<ObjectId, double>>> by_anchor_;
    std::unordered_map<ObjectId, std::vector<uint32_t>> obj_anchors_;
    uint64_t generation_ = 0;
};

} // namespace indoorsq
