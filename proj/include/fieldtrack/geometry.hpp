#pragma once

#include <cmath>

namespace fieldtrack {

/// 2D point. Units depend on context: pixels in image space, millimeters on the field.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned box in image pixels, top-left origin.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    friend bool operator==(const BBox&, const BBox&) = default;

    Point2 center() const { return {x + w / 2.0, y + h / 2.0}; }
    double area() const { return w * h; }
};

}  // namespace fieldtrack
