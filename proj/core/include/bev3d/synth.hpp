#pragma once

#include "bev3d/camgeo.hpp"
#include "bev3d/pipeline.hpp"
#include "bev3d/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace bev3d {

enum class TerrainMode { Flat, PlanarSlope, Sinusoidal };

/// Virtual highway scene: straight lanes along the world X axis, camera
/// poles on both roadsides, a UAV ground-plane similarity for the
/// BEV-annotation route.
struct SynthConfig {
  std::uint64_t seed = 1;
  int pole_count = 4;
  int cameras_per_pole = 2;       // near + far zoom per side
  double camera_height = 12.0;    // meters, >= 10 by convention
  int lane_count = 6;
  std::pair<int, int> vehicle_count_range{20, 60};
  Vec2 speed_range{15.0, 30.0};   // m/s
  int clip_length = 60;
  double rate_hz = 2.0;
  TerrainMode terrain = TerrainMode::Flat;
  double congestion = 0.0;        // 0 sparse .. 1 dense
  // world -> UAV-plane similarity: pixels-per-meter scale, rotation,
  // pixel offset
  double uav_px_per_meter = 8.0;
  double uav_rotation = 0.3;
  Vec2 uav_offset{3600.0, 600.0};
  double injected_time_shift = 0.0;  // camera clock offset, seconds

  void validate() const;
};

struct UavBox {
  std::int64_t track = 0;
  VehicleClass cls = VehicleClass::Car;
  RotatedRect2D rect;  // UAV pixels
};

struct SynthClip {
  Clip gt;                                  // world-frame ground truth
  Homography uav_to_world;                  // UAV pixels -> world ground plane
  std::vector<std::vector<UavBox>> uav;     // per sample
  std::vector<CameraObservationStream> observations;
};

SceneConfig generate_scene(const SynthConfig& cfg);
SynthClip generate_clip(const SceneConfig& scene, const SynthConfig& cfg);

// Lane center Y coordinates of the generated road, nearest first.
std::vector<double> lane_centers(const SynthConfig& cfg);

}  // namespace bev3d
