#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace davar {

/// A box geometry in pixel coordinates (origin top-left, x right, y down).
///
/// Two encodings share one type:
///  - length 4: axis-aligned [x1, y1, x2, y2] with x2 > x1 and y2 > y1
///  - even length >= 8: closed polygon [x0, y0, x1, y1, ...], vertices in order
///
/// The length/area invariants are *not* enforced on construction; the
/// validator reports violations as BAD_POLYGON and normalize_bbox throws.
struct GeoBox {
  std::vector<double> points;

  GeoBox() = default;
  GeoBox(std::initializer_list<double> pts) : points(pts) {}
  explicit GeoBox(std::vector<double> pts) : points(std::move(pts)) {}

  std::size_t coord_count() const { return points.size(); }
  std::size_t vertex_count() const { return points.size() / 2; }

  bool has_valid_length() const {
    return points.size() == 4 ||
           (points.size() >= 8 && points.size() % 2 == 0);
  }
  bool is_axis_aligned() const { return points.size() == 4; }
  bool is_polygon() const {
    return points.size() >= 8 && points.size() % 2 == 0;
  }

  double x(std::size_t vertex) const { return points[2 * vertex]; }
  double y(std::size_t vertex) const { return points[2 * vertex + 1]; }

  bool operator==(const GeoBox&) const = default;
};

/// Twice the signed shoelace area of a vertex list. Positive means the
/// canonical winding used throughout this library.
double signed_area2(const std::vector<double>& flat_points);

/// |shoelace area| of a box in either encoding (rect area for 4-form).
double box_area(const GeoBox& b);

/// Axis-aligned hull [x1, y1, x2, y2] over the vertices of either encoding.
std::array<double, 4> axis_hull(const GeoBox& b);

/// Canonicalize a box: the 4-form becomes its 4-vertex polygon
/// [x1,y1, x2,y1, x2,y2, x1,y2]; polygons are rewound to positive shoelace
/// area and rotated so the first vertex has the smallest (y, x).
/// Throws Error(DegenerateBox) on zero area or an inverted 4-form, and
/// Error(SchemaShapeError) when the length invariant is violated.
GeoBox normalize_bbox(const GeoBox& b);

/// True when the polygon is convex (strictly, collinear runs allowed) under
/// either winding. 4-form boxes are always convex.
bool is_convex(const GeoBox& b);

}  // namespace davar
