#pragma once

#include "bev3d/camgeo.hpp"
#include "bev3d/polygeo.hpp"
#include "bev3d/types.hpp"

#include <optional>
#include <vector>

namespace bev3d {

/// Inputs of the perspective length correction: a UAV at height H sees a
/// vehicle of height h elongated to l'; d is the ground-plane distance
/// between the UAV nadir and the vehicle.
struct LengthRefinementInput {
  double observed_length = 0.0;  // l'
  double uav_height = 0.0;       // H
  double vehicle_height = 0.0;   // h
  double offset = 0.0;           // d

  void validate() const;
};

// l = ((l' + d) / H) * (H - h) - d. Always <= l'.
double refine_length(const LengthRefinementInput& in);

// Maps the 4 rect corners through the homography and fits a rectangle to
// the resulting quadrilateral: center = corner mean, angle = mean of
// opposite-edge directions, dims = mean opposite-edge lengths.
// `fit_residual`, when given, receives the max corner distance between the
// mapped quad and the fitted rectangle (0 for affine maps).
RotatedRect2D bev_rect_to_world(const Homography& uav_to_world,
                                const RotatedRect2D& rect,
                                double* fit_residual = nullptr);

// Queries terrain altitude at the rect center and lifts to a 3D box with
// the class-average height. Throws when the center is outside the grid.
Box3D lift_to_3d(const RotatedRect2D& rect, const Terrain& terrain,
                 const ClassHeightTable& heights, VehicleClass cls);

struct BoxProjection {
  int box_index = 0;
  std::optional<Polygon2D> polygon;
  std::array<std::optional<Vec2>, 8> corners;
};

struct CameraProjections {
  std::string camera_id;
  std::vector<BoxProjection> boxes;
};

// 8-corner perspective projection of every box into every scene camera.
std::vector<CameraProjections> project_annotations(const SceneConfig& scene,
                                                   const Sample& sample);

// Keeps trajectories whose duration is >= min_duration (boundary
// inclusive); order preserved.
std::vector<Trajectory> prune_trajectories(std::vector<Trajectory> trajs,
                                           double min_duration = 1.0);

// Fills missing interior frames by linear interpolation of center, size and
// shortest-arc-unwrapped yaw. Endpoints are never extrapolated; inserted
// boxes carry the interpolated flag.
Trajectory interpolate_gaps(const Trajectory& traj, double rate_hz);

/// Timestamped axis-aligned or rotated observation in a camera image.
struct CameraObservation {
  double timestamp = 0.0;
  RotatedRect2D rect;  // image pixels
};

struct CameraObservationStream {
  std::string camera_id;
  std::vector<CameraObservation> observations;
};

enum class SyncScore { MeanRectIou };

struct SyncConfig {
  Vec2 shift_range{-3.0, 3.0};  // seconds
  double shift_step = 0.5;
  SyncScore score = SyncScore::MeanRectIou;

  void validate() const;
};

// Grid search over candidate shifts: UAV boxes at (obs time - shift) are
// projected into each camera and scored by greedy mean rect IoU against the
// observations. Returns the argmax shift; ties break to smallest |shift|.
double estimate_time_shift(const Clip& uav_clip,
                           const std::vector<CameraObservationStream>& obs,
                           const SceneConfig& scene, const SyncConfig& cfg);

// Axis-aligned bounding rectangle of a projected box polygon, used as the
// sync scoring proxy.
std::optional<RotatedRect2D> projected_bounding_rect(const CameraModel& camera,
                                                     const Box3D& box);

}  // namespace bev3d
