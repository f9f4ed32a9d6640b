#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bev3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown when an input value breaks a documented invariant. `field` holds a
/// dotted path into the offending record (e.g. "cameras[2].rotation").
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class VehicleClass { Car, Van, Bus, Truck };

constexpr std::array<VehicleClass, 4> kAllClasses = {
    VehicleClass::Car, VehicleClass::Van, VehicleClass::Bus,
    VehicleClass::Truck};

std::string to_string(VehicleClass c);
// Throws ValidationError for anything outside the four-class set.
VehicleClass parse_vehicle_class(const std::string& name);

/// Axis-aligned world volume annotations live in. Default matches the
/// standard highway setup: X in [-400,400], Y in [-40,40], Z in [0,6] meters.
struct PerceptionCuboid {
  Vec2 x_range{-400.0, 400.0};
  Vec2 y_range{-40.0, 40.0};
  Vec2 z_range{0.0, 6.0};

  bool contains(const Vec3& p) const {
    return p.x() >= x_range[0] && p.x() <= x_range[1] &&
           p.y() >= y_range[0] && p.y() <= y_range[1] &&
           p.z() >= z_range[0] && p.z() <= z_range[1];
  }
  void validate(const std::string& path = "cuboid") const;
};

/// Pinhole camera. Camera frame follows the KITTI convention: x right,
/// y down, z forward along the optical axis. `rotation` maps camera-frame
/// directions into world frame; `translation` is the camera center in world.
struct CameraModel {
  std::string id;
  int width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 world_to_camera(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }
  Vec3 camera_to_world(const Vec3& p) const {
    return rotation * p + translation;
  }
  Vec3 optical_axis_world() const { return rotation.col(2); }

  void validate(const std::string& path = "camera") const;
};

// Normalize an angle to (-pi, pi].
double normalize_angle(double a);

/// Oriented vehicle box in world frame. Yaw rotates counterclockwise about
/// world +Z from the +X axis; the length axis of the box points along yaw.
struct Box3D {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Zero();  // length, width, height
  double yaw = 0.0;
  VehicleClass cls = VehicleClass::Car;
  std::optional<std::int64_t> track;
  bool interpolated = false;

  double length() const { return size.x(); }
  double width() const { return size.y(); }
  double height() const { return size.z(); }
  double volume() const { return size.prod(); }

  void validate(const std::string& path = "box") const;
};

enum class RectFrame { UavPixels, WorldGround, ImagePixels };

/// Rotated rectangle, either in UAV image pixels or on the world ground
/// plane (meters); `frame` tags which.
struct RotatedRect2D {
  Vec2 center = Vec2::Zero();
  double length = 0, width = 0;
  double angle = 0.0;
  RectFrame frame = RectFrame::WorldGround;

  std::array<Vec2, 4> corners() const;
  double area() const { return length * width; }
  void validate(const std::string& path = "rect") const;
};

struct Detection {
  Box3D box;
  double score = 0.0;

  void validate(const std::string& path = "detection") const;
};

struct Sample {
  double timestamp = 0.0;
  std::vector<Box3D> boxes;
};

/// 60 samples at 2 Hz by default; the dataset's basic unit.
struct Clip {
  std::string scene_id;
  double rate_hz = 2.0;
  std::vector<Sample> samples;

  void validate(const std::string& path = "clip") const;
};

struct TrajectoryPoint {
  double timestamp = 0.0;
  Box3D box;
};

struct Trajectory {
  std::int64_t track = 0;
  VehicleClass cls = VehicleClass::Car;
  std::vector<TrajectoryPoint> points;  // timestamps strictly increasing

  double duration() const {
    return points.empty() ? 0.0
                          : points.back().timestamp - points.front().timestamp;
  }
  void validate(const std::string& path = "trajectory") const;
};

/// Regular-grid heightmap standing in for the dense 3D reconstruction.
/// grid[row][col] is altitude at (origin.x + col*cell, origin.y + row*cell).
struct Terrain {
  Vec2 origin = Vec2::Zero();
  double cell_size = 1.0;
  std::vector<std::vector<double>> grid;

  int rows() const { return static_cast<int>(grid.size()); }
  int cols() const { return grid.empty() ? 0 : static_cast<int>(grid[0].size()); }
  // Bilinear altitude at a world XY point. Throws if outside the grid extent.
  double altitude(const Vec2& xy) const;
  void validate(const std::string& path = "terrain") const;
};

/// Average vehicle height per class; config-mandatory, no shipped defaults.
struct ClassHeightTable {
  std::map<VehicleClass, double> heights;

  double at(VehicleClass c) const;
  void validate(const std::string& path = "class_heights") const;
};

struct SceneConfig {
  std::string id;
  PerceptionCuboid cuboid;
  std::vector<CameraModel> cameras;
  Terrain terrain;
  ClassHeightTable class_heights;

  void validate(const std::string& path = "scene") const;
};

}  // namespace bev3d
