#pragma once

#include <algorithm>
#include <string>

#include "osod/common.hpp"

namespace osod {

// Axis-aligned box, corner convention. Coordinates are continuous pixel
// values as stored in COCO JSON; no "+1" pixel offset anywhere.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  bool operator==(const BBox&) const = default;
};

// COCO bbox convention adapter: [x, y, w, h] -> corners.
inline BBox from_xywh(double x, double y, double w, double h) {
  if (w < 0.0 || h < 0.0) {
    throw validation_error("malformed box: negative width or height (w=" +
                           std::to_string(w) + ", h=" + std::to_string(h) + ")");
  }
  return BBox{x, y, x + w, y + h};
}

inline double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

// Intersection over union. Degenerate boxes are legal and contribute 0.
inline double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

}  // namespace osod
