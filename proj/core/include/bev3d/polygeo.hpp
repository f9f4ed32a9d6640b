#pragma once

#include "bev3d/types.hpp"

#include <optional>
#include <vector>

namespace bev3d {

/// Simple polygon with counterclockwise vertex order (signed area > 0).
struct Polygon2D {
  std::vector<Vec2> vertices;
  // Set when a projected box straddles the near plane and only the in-front
  // corners contributed.
  bool partial = false;
};

// Signed shoelace area; positive for CCW order.
double signed_area(const std::vector<Vec2>& vertices);
double polygon_area(const Polygon2D& p);

// Minimal CCW convex hull; collinear boundary points dropped. Throws
// ValidationError when all points are collinear or fewer than 3 given.
Polygon2D convex_hull(const std::vector<Vec2>& points);

bool is_convex(const Polygon2D& p);

// Sutherland-Hodgman clip of convex `a` by convex `b`. Absent when the
// intersection area is below 1e-12.
std::optional<Polygon2D> convex_intersect(const Polygon2D& a,
                                          const Polygon2D& b);

// Exact union area of convex polygons via vertical slab decomposition.
double union_area(const std::vector<Polygon2D>& polys);

// 8 box corners: indices 0-3 bottom face CCW starting at (+l/2,+w/2) in the
// box frame, 4-7 the top face in the same order.
std::array<Vec3, 8> box3d_corners(const Box3D& box);

// BEV footprint of a box on the world ground plane.
Polygon2D box3d_footprint(const Box3D& box);

// Hull of the projected in-front corners, optionally clipped to image
// bounds. Absent when no corner is in front of the camera or the clipped
// hull degenerates. `partial` flags near-plane straddling.
std::optional<Polygon2D> box3d_image_polygon(const CameraModel& camera,
                                             const Box3D& box,
                                             bool clip_to_image = true);

// IoU of two rotated rectangles. Throws on frame mismatch.
double rotated_rect_iou(const RotatedRect2D& a, const RotatedRect2D& b);

// Oriented 3D IoU: BEV polygon intersection area times vertical overlap,
// over the union volume.
double iou3d(const Box3D& a, const Box3D& b);

}  // namespace bev3d
