#include "malign/geometry.hpp"

namespace malign {
namespace {

int orientation(const Point2& a, const Point2& b, const Point2& c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

}  // namespace

bool segments_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    // Any zero means an endpoint lies on the other segment's line: either a
    // touch or a collinear overlap, neither of which is a proper crossing.
    if (o1 == 0 || o2 == 0 || o3 == 0 || o4 == 0) return false;
    return o1 != o2 && o3 != o4;
}

}  // namespace malign
