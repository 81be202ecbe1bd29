#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace wsol {

// Axis-aligned box, continuous coordinates, half-open convention.
// Valid boxes satisfy x_max > x_min and y_max > y_min.
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_max > x_min && y_max > y_min;
  }

  bool operator==(const Box& o) const {
    return x_min == o.x_min && y_min == o.y_min && x_max == o.x_max && y_max == o.y_max;
  }
};

inline double area(const Box& b) {
  return (b.x_max - b.x_min) * (b.y_max - b.y_min);
}

inline double intersection_area(const Box& a, const Box& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

// Intersection-over-union; 0 for disjoint boxes.
inline double iou(const Box& a, const Box& b) {
  const double ix_min = std::max(a.x_min, b.x_min);
  const double iy_min = std::max(a.y_min, b.y_min);
  const double ix_max = std::min(a.x_max, b.x_max);
  const double iy_max = std::min(a.y_max, b.y_max);
  const double iw = ix_max - ix_min;
  const double ih = iy_max - iy_min;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = area(a) + area(b) - inter;
  return inter / uni;
}

// Object area divided by image area. Boxes are expected to be clipped to the
// image before this is called; clipping happens at ingestion, not here.
inline double normalized_size(const Box& b, double image_w, double image_h) {
  if (!(image_w > 0.0) || !(image_h > 0.0))
    throw std::invalid_argument("normalized_size: image dimensions must be positive");
  return area(b) / (image_w * image_h);
}

// r-th root of a normalized size in (0,1].
inline double root_transform(double s, int r) {
  if (!(s > 0.0)) throw std::invalid_argument("root_transform: s must be positive");
  if (r < 1) throw std::invalid_argument("root_transform: r must be >= 1");
  if (r == 1) return s;
  return std::pow(s, 1.0 / static_cast<double>(r));
}

inline double root_transform_inverse(double s, int r) {
  if (!(s > 0.0)) throw std::invalid_argument("root_transform_inverse: s must be positive");
  if (r < 1) throw std::invalid_argument("root_transform_inverse: r must be >= 1");
  if (r == 1) return s;
  return std::pow(s, static_cast<double>(r));
}

inline Box clip_to_image(const Box& b, double image_w, double image_h) {
  Box c;
  c.x_min = std::max(0.0, std::min(b.x_min, image_w));
  c.y_min = std::max(0.0, std::min(b.y_min, image_h));
  c.x_max = std::max(0.0, std::min(b.x_max, image_w));
  c.y_max = std::max(0.0, std::min(b.y_max, image_h));
  return c;
}

}  // namespace wsol
