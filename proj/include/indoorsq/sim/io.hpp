#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "indoorsq/anchor_index.hpp"
#include "indoorsq/reading_store.hpp"
#include "indoorsq/result_set.hpp"
#include "indoorsq/sim/trace.hpp"
#include "indoorsq/site.hpp"

namespace indoorsq {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_time(double t) {
    char buf[32];
    if (t == static_cast<double>(static_cast<long long>(t)))
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(t));
    else
        std::snprintf(buf, sizeof buf, "%.3f", t);
    return buf;
}

} // namespace detail

inline void write_readings_csv(std::ostream& os, const Site& site,
                               const std::vector<RawReading>& readings) {
    os << "timestamp,object_id,reader_id\n";
    for (const RawReading& r : readings)
        os << detail::format_time(r.t) << ',' << r.object << ','
           << site.plan().readers.at(r.reader).id << '\n';
}

inline std::vector<RawReading> read_readings_csv(std::istream& is, const Site& site) {
    std::vector<RawReading> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "timestamp,object_id,reader_id") continue;
        std::istringstream ss(line);
        std::string t_s, obj_s, reader_s;
        if (!std::getline(ss, t_s, ',') || !std::getline(ss, obj_s, ',') ||
            !std::getline(ss, reader_s))
            throw IoError("readings line " + std::to_string(lineno) + ": expected 3 fields");
        auto it = site.plan().reader_idx.find(reader_s);
        if (it == site.plan().reader_idx.end())
            throw IoError("readings line " + std::to_string(lineno) + ": unknown reader '" +
                          reader_s + "'");
        out.push_back({std::stod(t_s), static_cast<ObjectId>(std::stoul(obj_s)), it->second});
    }
    return out;
}

inline void write_index_dump(std::ostream& os, const Site& site, const ApToObjIndex& index) {
    os << "anchor_id,x,y,object_id,probability\n";
    char buf[128];
    for (uint32_t a = 0; a < index.anchor_count(); ++a) {
        const AnchorPoint& ap = site.grid().anchors.at(a);
        for (const auto& [obj, p] : index.get(a)) {
            std::snprintf(buf, sizeof buf, "%u,%.4f,%.4f,%u,%.6f\n", a, ap.pos.x, ap.pos.y, obj, p);
            os << buf;
        }
    }
}

inline void write_results_csv(std::ostream& os,
                              const std::vector<std::tuple<std::string, double, const ResultSet*>>& results) {
    os << "query_id,t,object_id,probability\n";
    char buf[96];
    for (const auto& [id, t, rs] : results) {
        for (const auto& [obj, p] : *rs) {
            std::snprintf(buf, sizeof buf, "%s,%s,%u,%.6f\n", id.c_str(),
                          detail::format_time(t).c_str(), obj, p);
            os << buf;
        }
    }
}

inline void write_traces_csv(std::ostream& os, const std::vector<Trajectory>& traces) {
    os << "t,object_id,x,y\n";
    char buf[96];
    for (const Trajectory& tr : traces)
        for (size_t t = 0; t < tr.points.size(); ++t) {
            std::snprintf(buf, sizeof buf, "%zu,%u,%.4f,%.4f\n", t, tr.object, tr.points[t].pos.x,
                          tr.points[t].pos.y);
            os << buf;
        }
}

} // namespace indoorsq

