#include "davarlabel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "davarlabel/errors.hpp"

namespace davar {

double signed_area2(const std::vector<double>& flat) {
  const std::size_t n = flat.size() / 2;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    sum += flat[2 * i] * flat[2 * j + 1] - flat[2 * j] * flat[2 * i + 1];
  }
  return sum;
}

double box_area(const GeoBox& b) {
  if (b.is_axis_aligned()) {
    return std::abs((b.points[2] - b.points[0]) * (b.points[3] - b.points[1]));
  }
  return std::abs(signed_area2(b.points)) / 2.0;
}

std::array<double, 4> axis_hull(const GeoBox& b) {
  if (b.is_axis_aligned()) {
    return {b.points[0], b.points[1], b.points[2], b.points[3]};
  }
  double x1 = std::numeric_limits<double>::infinity();
  double y1 = std::numeric_limits<double>::infinity();
  double x2 = -std::numeric_limits<double>::infinity();
  double y2 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.vertex_count(); ++i) {
    x1 = std::min(x1, b.x(i));
    y1 = std::min(y1, b.y(i));
    x2 = std::max(x2, b.x(i));
    y2 = std::max(y2, b.y(i));
  }
  return {x1, y1, x2, y2};
}

namespace {

// Rotate so the vertex with the smallest (y, x) comes first.
void rotate_to_min_vertex(std::vector<double>& flat) {
  const std::size_t n = flat.size() / 2;
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const bool smaller = flat[2 * i + 1] < flat[2 * best + 1] ||
                         (flat[2 * i + 1] == flat[2 * best + 1] &&
                          flat[2 * i] < flat[2 * best]);
    if (smaller) best = i;
  }
  std::rotate(flat.begin(), flat.begin() + 2 * best, flat.end());
}

}  // namespace

GeoBox normalize_bbox(const GeoBox& b) {
  if (!b.has_valid_length()) {
    throw Error(Errc::SchemaShapeError,
                "GeoBox must have 4 coordinates or an even count >= 8, got " +
                    std::to_string(b.coord_count()));
  }
  if (b.is_axis_aligned()) {
    const double x1 = b.points[0], y1 = b.points[1];
    const double x2 = b.points[2], y2 = b.points[3];
    if (!(x2 > x1) || !(y2 > y1)) {
      throw Error(Errc::DegenerateBox,
                  "axis-aligned box requires x2 > x1 and y2 > y1");
    }
    return GeoBox{{x1, y1, x2, y1, x2, y2, x1, y2}};
  }
  std::vector<double> flat = b.points;
  const double area2 = signed_area2(flat);
  if (area2 == 0.0) {
    throw Error(Errc::DegenerateBox, "polygon has zero area");
  }
  if (area2 < 0.0) {
    // Reverse the cycle to restore positive winding.
    std::vector<double> rev;
    rev.reserve(flat.size());
    for (std::size_t i = flat.size(); i >= 2; i -= 2) {
      rev.push_back(flat[i - 2]);
      rev.push_back(flat[i - 1]);
    }
    flat = std::move(rev);
  }
  rotate_to_min_vertex(flat);
  return GeoBox{std::move(flat)};
}

bool is_convex(const GeoBox& b) {
  if (b.is_axis_aligned()) return true;
  if (!b.is_polygon()) return false;
  const std::size_t n = b.vertex_count();
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const std::size_t k = (i + 2) % n;
    const double cross = (b.x(j) - b.x(i)) * (b.y(k) - b.y(j)) -
                         (b.y(j) - b.y(i)) * (b.x(k) - b.x(j));
    if (cross == 0.0) continue;
    const int s = cross > 0.0 ? 1 : -1;
    if (sign == 0) {
      sign = s;
    } else if (s != sign) {
      return false;
    }
  }
  return true;
}

}  // namespace davar
