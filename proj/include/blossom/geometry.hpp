// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "blossom/annotation_io.hpp"

namespace blossom {

/// A point in normalized image coordinates.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
    friend Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
};

/// YOLO boxes store their center directly.
inline Point2 box_centroid(const BoundingBox& box) noexcept { return {box.cx, box.cy}; }

/// Shifts the box center; the result is not revalidated.
inline BoundingBox translate(BoundingBox box, double dx, double dy) noexcept {
    box.cx += dx;
    box.cy += dy;
    return box;
}

inline double squared_distance(Point2 a, Point2 b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double euclidean_distance(Point2 a, Point2 b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

/// Intersection over union of two closed axis-aligned boxes. Touching
/// edges have zero-area overlap and give 0.
inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    if (a == b) return a.w > 0.0 && a.h > 0.0 ? 1.0 : 0.0;
    const double ix = std::min(a.cx + a.w / 2, b.cx + b.w / 2) - std::max(a.cx - a.w / 2, b.cx - b.w / 2);
    const double iy = std::min(a.cy + a.h / 2, b.cy + b.h / 2) - std::max(a.cy - a.h / 2, b.cy - b.h / 2);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

} // namespace blossom
