#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace indoorsq {

using ObjectId = uint32_t;

struct ReadingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RawReading {
    double t = 0.0;
    ObjectId object = 0;
    uint32_t reader = 0;
};

struct AggregatedReading {
    int64_t second = 0;
    uint32_t reader = 0;
};

// Per-object buffer of recent detections. Raw readings are aggregated to one
// entry per second (modal reader, ties to the lowest index). Only the two most
// recent detection runs are retained: a third distinct device evicts the
// oldest run, and entries older than 120 s fall off regardless.
class ReadingStore {
public:
    static constexpr double kMaxAgeSeconds = 120.0;

    explicit ReadingStore(uint32_t n_readers) : dto_obj_(n_readers) {}

    void ingest(const RawReading& r) {
        if (r.reader >= dto_obj_.size())
            throw ReadingError("reading references unknown reader index " + std::to_string(r.reader));
        ObjState& st = objects_[r.object];
        if (st.has_any && r.t < st.t_last)
            throw ReadingError("out-of-order reading for object " + std::to_string(r.object) +
                               " (t=" + std::to_string(r.t) + " after t=" + std::to_string(st.t_last) + ")");
        int64_t sec = static_cast<int64_t>(std::floor(r.t));
        if (st.runs.empty() || st.runs.back().device != r.reader) {
            st.runs.push_back({r.reader, {}});
            if (st.runs.size() > 2) st.runs.pop_front();
        }
        st.runs.back().counts[sec] += 1;

        int64_t cutoff = sec - static_cast<int64_t>(kMaxAgeSeconds);
        for (Run& run : st.runs) {
            auto& c = run.counts;
            c.erase(c.begin(), c.lower_bound(cutoff));
        }
        while (st.runs.size() > 1 && st.runs.front().counts.empty()) st.runs.pop_front();

        if (st.has_any && st.last_reader != r.reader)
            dto_obj_[st.last_reader].erase(r.object);
        dto_obj_[r.reader].insert(r.object);
        st.has_any = true;
        st.t_last = r.t;
        st.last_reader = r.reader;
    }

    struct Window {
        int64_t t1 = 0, t2 = 0;
        uint32_t d1 = 0, d2 = 0; // previous / most recent device (equal if one run)
        std::vector<AggregatedReading> entries;
    };

    std::optional<Window> aggregated_window(ObjectId obj) const {
        auto it = objects_.find(obj);
        if (it == objects_.end() || it->second.runs.empty()) return std::nullopt;
        const ObjState& st = it->second;

        std::map<int64_t, std::map<uint32_t, int>> merged;
        for (const Run& run : st.runs)
            for (const auto& [sec, count] : run.counts) merged[sec][run.device] += count;
        if (merged.empty()) return std::nullopt;

        Window w;
        for (const auto& [sec, by_dev] : merged) {
            uint32_t best_dev = 0;
            int best = -1;
            for (const auto& [dev, count] : by_dev) {
                if (count > best) {
                    best = count;
                    best_dev = dev;
                }
            }
            w.entries.push_back({sec, best_dev});
        }
        w.t1 = w.entries.front().second;
        w.t2 = w.entries.back().second;
        w.d2 = st.runs.back().device;
        w.d1 = st.runs.size() == 2 ? st.runs.front().device : w.d2;
        return w;
    }

    std::optional<std::pair<uint32_t, double>> latest_detection(ObjectId obj) const {
        auto it = objects_.find(obj);
        if (it == objects_.end() || !it->second.has_any) return std::nullopt;
        return std::make_pair(it->second.last_reader, it->second.t_last);
    }

    const std::set<ObjectId>& objects_at(uint32_t reader) const { return dto_obj_.at(reader); }

    std::vector<ObjectId> detected_objects() const {
        std::vector<ObjectId> out;
        for (const auto& [obj, st] : objects_)
            if (st.has_any) out.push_back(obj);
        std::sort(out.begin(), out.end());
        return out;
    }

    uint32_t reader_count() const { return static_cast<uint32_t>(dto_obj_.size()); }

private:
    struct Run {
        uint32_t device;
        std::map<int64_t, int> counts; // second -> reading count
    };
    struct ObjState {
        std::deque<Run> runs;
        bool has_any = false;
        double t_last = 0.0;
        uint32_t last_reader = 0;
    };

    std::unordered_map<ObjectId, ObjState> objects_;
    std::vector<std::set<ObjectId>> dto_obj_;
};

} // namespace indoorsq
