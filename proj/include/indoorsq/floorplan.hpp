#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "indoorsq/geometry.hpp"

namespace indoorsq {

struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Straight axis-aligned corridor. `a` and `b` are the centerline endpoints;
// positions along the hallway are measured in meters from `a`.
struct Hallway {
    std::string id;
    Vec2 a, b;
    double width = 0.0;

    double length() const { return a.dist(b); }
    bool horizontal() const { return a.y == b.y; }
    Vec2 dir() const {
        double len = length();
        return {(b.x - a.x) / len, (b.y - a.y) / len};
    }
    Vec2 point_at(double t) const { return a + dir() * t; }
    double param_of(Vec2 p) const { return (p - a).dot(dir()); }
    Rect rect() const {
        Vec2 d = dir();
        Vec2 n{-d.y, d.x};
        Vec2 h = n * (width / 2.0);
        return Rect::from_corners(std::min(a.x, b.x) - std::abs(h.x), std::min(a.y, b.y) - std::abs(h.y),
                                  std::max(a.x, b.x) + std::abs(h.x), std::max(a.y, b.y) + std::abs(h.y));
    }
};

struct Room {
    std::string id;
    Rect rect;
    std::vector<std::string> door_ids;
};

struct Door {
    std::string id;
    std::string room_id;
    std::string hallway_id;
    double position = 0.0; // meters along the hallway centerline
};

struct ReaderSpec {
    std::string id;
    std::string hallway_id;
    double position = 0.0;
    double activation_range = 0.0;
};

// Static description of one floor. Entity vectors are sorted by id, and the
// vector position doubles as the dense index used across the library.
struct FloorPlan {
    std::vector<Hallway> hallways;
    std::vector<Room> rooms;
    std::vector<Door> doors;
    std::vector<ReaderSpec> readers;

    std::map<std::string, uint32_t> hallway_idx;
    std::map<std::string, uint32_t> room_idx;
    std::map<std::string, uint32_t> door_idx;
    std::map<std::string, uint32_t> reader_idx;

    Rect bounding_box() const {
        Rect bb = hallways.empty() ? Rect{} : hallways[0].rect();
        for (const auto& h : hallways) {
            Rect r = h.rect();
            bb = {std::min(bb.x0, r.x0), std::min(bb.y0, r.y0), std::max(bb.x1, r.x1), std::max(bb.y1, r.y1)};
        }
        for (const auto& r : rooms) {
            bb = {std::min(bb.x0, r.rect.x0), std::min(bb.y0, r.rect.y0),
                  std::max(bb.x1, r.rect.x1), std::max(bb.y1, r.rect.y1)};
        }
        return bb;
    }
};

namespace detail {

template <typename T>
void sort_and_index(std::vector<T>& items, std::map<std::string, uint32_t>& index,
                    const char* kind) {
    std::sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
    for (uint32_t i = 0; i < items.size(); ++i) {
        if (!index.emplace(items[i].id, i).second)
            throw PlanError(std::string("duplicate ") + kind + " id '" + items[i].id + "'");
    }
}

} // namespace detail

inline FloorPlan parse_floorplan(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw PlanError(std::string("floor plan is not valid JSON: ") + e.what());
    }

    FloorPlan plan;
    for (const auto& h : j.value("hallways", nlohmann::json::array())) {
        Hallway hw;
        hw.id = h.at("id").get<std::string>();
        hw.a = {h.at("x0").get<double>(), h.at("y0").get<double>()};
        hw.b = {h.at("x1").get<double>(), h.at("y1").get<double>()};
        hw.width = h.at("width").get<double>();
        if (hw.a.x != hw.b.x && hw.a.y != hw.b.y)
            throw PlanError("hallway '" + hw.id + "' is not axis-aligned");
        if (hw.length() <= 0.0)
            throw PlanError("hallway '" + hw.id + "' has zero length");
        if (hw.width <= 0.0)
            throw PlanError("hallway '" + hw.id + "' has non-positive width");
        plan.hallways.push_back(std::move(hw));
    }
    if (plan.hallways.empty()) throw PlanError("floor plan has no hallways");

    for (const auto& r : j.value("rooms", nlohmann::json::array())) {
        Room room;
        room.id = r.at("id").get<std::string>();
        room.rect = Rect::from_xywh(r.at("x").get<double>(), r.at("y").get<double>(),
                                    r.at("w").get<double>(), r.at("h").get<double>());
        if (room.rect.empty()) throw PlanError("room '" + room.id + "' has empty extent");
        for (const auto& d : r.value("doors", nlohmann::json::array()))
            room.door_ids.push_back(d.get<std::string>());
        if (room.door_ids.empty()) throw PlanError("room '" + room.id + "' has no door");
        plan.rooms.push_back(std::move(room));
    }

    for (const auto& d : j.value("doors", nlohmann::json::array())) {
        Door door;
        door.id = d.at("id").get<std::string>();
        door.room_id = d.at("room_id").get<std::string>();
        door.hallway_id = d.at("hallway_id").get<std::string>();
        door.position = d.at("position").get<double>();
        plan.doors.push_back(std::move(door));
    }

    for (const auto& rd : j.value("readers", nlohmann::json::array())) {
        ReaderSpec r;
        r.id = rd.at("id").get<std::string>();
        r.hallway_id = rd.at("hallway_id").get<std::string>();
        r.position = rd.at("position").get<double>();
        r.activation_range = rd.at("activation_range").get<double>();
        plan.readers.push_back(std::move(r));
    }

    detail::sort_and_index(plan.hallways, plan.hallway_idx, "hallway");
    detail::sort_and_index(plan.rooms, plan.room_idx, "room");
    detail::sort_and_index(plan.doors, plan.door_idx, "door");
    detail::sort_and_index(plan.readers, plan.reader_idx, "reader");

    // cross references
    for (const auto& door : plan.doors) {
        if (!plan.room_idx.count(door.room_id))
            throw PlanError("door '" + door.id + "' references unknown room '" + door.room_id + "'");
        auto hit = plan.hallway_idx.find(door.hallway_id);
        if (hit == plan.hallway_idx.end())
            throw PlanError("door '" + door.id + "' references unknown hallway '" + door.hallway_id + "'");
        const Hallway& h = plan.hallways[hit->second];
        if (door.position < 0.0 || door.position > h.length())
            throw PlanError("door '" + door.id + "' lies off hallway '" + h.id + "' (position " +
                            std::to_string(door.position) + ", length " + std::to_string(h.length()) + ")");
    }
    for (const auto& room : plan.rooms) {
        for (const auto& did : room.door_ids) {
            auto dit = plan.door_idx.find(did);
            if (dit == plan.door_idx.end())
                throw PlanError("room '" + room.id + "' lists unknown door '" + did + "'");
            if (plan.doors[dit->second].room_id != room.id)
                throw PlanError("door '" + did + "' does not belong to room '" + room.id + "'");
        }
    }
    for (const auto& door : plan.doors) {
        const Room& room = plan.rooms[plan.room_idx.at(door.room_id)];
        if (std::find(room.door_ids.begin(), room.door_ids.end(), door.id) == room.door_ids.end())
            throw PlanError("door '" + door.id + "' missing from room '" + room.id + "' door list");
    }
    for (const auto& r : plan.readers) {
        auto hit = plan.hallway_idx.find(r.hallway_id);
        if (hit == plan.hallway_idx.end())
            throw PlanError("reader '" + r.id + "' references unknown hallway '" + r.hallway_id + "'");
        const Hallway& h = plan.hallways[hit->second];
        if (r.position < 0.0 || r.position > h.length())
            throw PlanError("reader '" + r.id + "' lies off hallway '" + h.id + "'");
        if (r.activation_range <= 0.0)
            throw PlanError("reader '" + r.id + "' has non-positive activation range");
    }
    return plan;
}

inline FloorPlan load_floorplan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlanError("cannot open floor plan file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_floorplan(ss.str());
}

} // namespace indoorsq
