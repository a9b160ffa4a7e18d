#pragma once

#include <algorithm>
#include <cmath>

namespace indoorsq {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double dist(Vec2 o) const { return (*this - o).norm(); }
};

// Axis-aligned rectangle, stored as min/max corners.
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    static Rect from_corners(double ax, double ay, double bx, double by) {
        return {std::min(ax, bx), std::min(ay, by), std::max(ax, bx), std::max(ay, by)};
    }
    static Rect from_xywh(double x, double y, double w, double h) {
        return {x, y, x + w, y + h};
    }

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
    bool empty() const { return x1 <= x0 || y1 <= y0; }

    bool contains(Vec2 p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }

    Rect intersect(const Rect& o) const {
        return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
    }

    // Distance from the rectangle to a point (0 when inside).
    double distance(Vec2 p) const {
        double dx = std::max({x0 - p.x, 0.0, p.x - x1});
        double dy = std::max({y0 - p.y, 0.0, p.y - y1});
        return std::hypot(dx, dy);
    }
};

inline bool circle_intersects_rect(Vec2 c, double r, const Rect& q) {
    return q.distance(c) <= r;
}

// Foot of the perpendicular from p onto segment a-b, as a parameter in [0, len].
inline double project_param_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 d = b - a;
    double len = d.norm();
    if (len <= 0.0) return 0.0;
    double t = (p - a).dot(d) / len;
    return std::clamp(t, 0.0, len);
}

} // namespace indoorsq
