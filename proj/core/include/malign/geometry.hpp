#pragma once

#include <cmath>

namespace malign {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline Point2 midpoint(const Point2& a, const Point2& b) {
    return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

/// True iff the open segments (a, b) and (c, d) cross at a single point
/// interior to both. Touching at an endpoint and collinear overlap do not count.
bool segments_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

}  // namespace malign
