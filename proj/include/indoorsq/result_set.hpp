#pragma once

#include <map>

#include "indoorsq/reading_store.hpp"

namespace indoorsq {

// Query result: object -> probability of satisfying the predicate. Supports
// the two operations query evaluation needs, merge-addition and scaling.
class ResultSet {
public:
    void add(ObjectId obj, double p) { probs_[obj] += p; }

    ResultSet& operator+=(const ResultSet& o) {
        for (const auto& [obj, p] : o.probs_) probs_[obj] += p;
        return *this;
    }

    friend ResultSet operator+(ResultSet a, const ResultSet& b) {
        a += b;
        return a;
    }

    void scale(double ratio) {
        for (auto& [obj, p] : probs_) p *= ratio;
    }

    double prob(ObjectId obj) const {
        auto it = probs_.find(obj);
        return it == probs_.end() ? 0.0 : it->second;
    }

    bool contains(ObjectId obj) const { return probs_.count(obj) > 0; }
    size_t size() const { return probs_.size(); }
    bool empty() const { return probs_.empty(); }

    auto begin() const { return probs_.begin(); }
    auto end() const { return probs_.end(); }

private:
    std::map<ObjectId, double> probs_;
};

} // namespace indoorsq
