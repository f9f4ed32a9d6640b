#pragma once

#include "bev3d/types.hpp"

#include <optional>
#include <vector>

namespace bev3d {

/// Points closer than this along the optical axis count as behind the camera.
constexpr double kNearPlaneEps = 1e-6;

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit norm within 1e-12

  Vec3 at(double t) const { return origin + t * direction; }
};

/// 3x3 projective plane map, canonically scaled so h33 = 1 when h33 != 0.
struct Homography {
  Mat3 m = Mat3::Identity();

  static Homography from_matrix(const Mat3& h);
  Homography inverse() const;
};

// Pinhole projection; absent when the point is behind the near plane.
// The pixel may lie outside image bounds (callers clip).
std::optional<Vec2> project_world_to_image(const CameraModel& camera,
                                           const Vec3& point);

// Ray through a pixel; origin is the camera center.
Ray pixel_ray(const CameraModel& camera, const Vec2& pixel);

// Throws ValidationError when the point maps to infinity (w = 0).
Vec2 apply_homography(const Homography& h, const Vec2& point);

// Entry/exit parameters of a ray against an axis-aligned box (slab method).
// Grazing contact counts as a hit with entry == exit.
std::optional<std::pair<double, double>> ray_cuboid_interval(
    const Ray& ray, const PerceptionCuboid& cuboid);

// `count` points uniformly spaced in ray parameter over the ray's
// [entry, exit] interval with the cuboid; empty when the ray misses.
std::vector<Vec3> sample_ray_points(const CameraModel& camera,
                                    const Vec2& pixel, int count,
                                    const PerceptionCuboid& cuboid);

// World point on the pixel ray at the given optical-axis depth (> 0).
Vec3 lift_pixel_with_depth(const CameraModel& camera, const Vec2& pixel,
                           double depth);

}  // namespace bev3d
