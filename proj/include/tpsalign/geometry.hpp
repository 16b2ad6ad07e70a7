#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace tpsalign {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const Point2&, const Point2&) = default;
    constexpr Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    constexpr Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
};

using Points = std::vector<Point2>;

inline double squared_distance(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(const Point2& a, const Point2& b) { return std::sqrt(squared_distance(a, b)); }

inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

} // namespace tpsalign
