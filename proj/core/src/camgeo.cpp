#include "bev3d/camgeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bev3d {

Homography Homography::from_matrix(const Mat3& h) {
  if (std::abs(h.determinant()) < 1e-15)
    throw ValidationError("homography", "matrix is singular");
  Homography out{h};
  if (std::abs(h(2, 2)) > 1e-12) out.m /= h(2, 2);
  return out;
}

Homography Homography::inverse() const {
  return Homography::from_matrix(m.inverse());
}

std::optional<Vec2> project_world_to_image(const CameraModel& camera,
                                           const Vec3& point) {
  const Vec3 pc = camera.world_to_camera(point);
  if (pc.z() <= kNearPlaneEps) return std::nullopt;
  return Vec2(camera.fx * pc.x() / pc.z() + camera.cx,
              camera.fy * pc.y() / pc.z() + camera.cy);
}

Ray pixel_ray(const CameraModel& camera, const Vec2& pixel) {
  const Vec3 dir_cam((pixel.x() - camera.cx) / camera.fx,
                     (pixel.y() - camera.cy) / camera.fy, 1.0);
  return Ray{camera.translation, (camera.rotation * dir_cam).normalized()};
}

Vec2 apply_homography(const Homography& h, const Vec2& point) {
  const Vec3 q = h.m * Vec3(point.x(), point.y(), 1.0);
  if (std::abs(q.z()) < 1e-15)
    throw ValidationError("homography.apply", "point maps to infinity");
  return Vec2(q.x() / q.z(), q.y() / q.z());
}

std::optional<std::pair<double, double>> ray_cuboid_interval(
    const Ray& ray, const PerceptionCuboid& cuboid) {
  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  const std::array<Vec2, 3> ranges = {cuboid.x_range, cuboid.y_range,
                                      cuboid.z_range};
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis], d = ray.direction[axis];
    const double lo = ranges[axis][0], hi = ranges[axis][1];
    if (std::abs(d) < 1e-15) {
      if (o < lo || o > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - o) / d, t1 = (hi - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;  // grazing (==) is a hit
  }
  return std::make_pair(t_enter, t_exit);
}

std::vector<Vec3> sample_ray_points(const CameraModel& camera,
                                    const Vec2& pixel, int count,
                                    const PerceptionCuboid& cuboid) {
  if (count < 1)
    throw ValidationError("sample_ray_points.count", "count must be >= 1");
  const Ray ray = pixel_ray(camera, pixel);
  const auto interval = ray_cuboid_interval(ray, cuboid);
  if (!interval) return {};
  const auto [t0, t1] = *interval;
  std::vector<Vec3> points;
  points.reserve(count);
  if (count == 1) {
    points.push_back(ray.at(0.5 * (t0 + t1)));
    return points;
  }
  const double step = (t1 - t0) / (count - 1);
  for (int i = 0; i < count; ++i) points.push_back(ray.at(t0 + i * step));
  return points;
}

Vec3 lift_pixel_with_depth(const CameraModel& camera, const Vec2& pixel,
                           double depth) {
  if (depth <= 0)
    throw ValidationError("lift_pixel_with_depth.depth", "depth must be > 0");
  const Vec3 pc(depth * (pixel.x() - camera.cx) / camera.fx,
                depth * (pixel.y() - camera.cy) / camera.fy, depth);
  return camera.camera_to_world(pc);
}

}  // namespace bev3d
