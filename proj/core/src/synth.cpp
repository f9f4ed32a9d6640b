#include "bev3d/synth.hpp"

#include "bev3d/rng.hpp"

#include <algorithm>
#include <cmath>

namespace bev3d {

namespace {

constexpr double kLaneWidth = 3.75;

struct ClassSpec {
  VehicleClass cls;
  double length, width, height;
};

constexpr std::array<ClassSpec, 4> kClassSpecs = {{
    {VehicleClass::Car, 4.6, 1.9, 1.45},
    {VehicleClass::Van, 5.2, 2.0, 1.95},
    {VehicleClass::Bus, 11.5, 2.9, 3.20},
    {VehicleClass::Truck, 9.0, 2.6, 3.40},
}};

// camera->world rotation looking along `forward` with image y pointing
// down in world (KITTI convention)
Mat3 look_at_rotation(const Vec3& forward) {
  const Vec3 z = forward.normalized();
  Vec3 x = z.cross(Vec3::UnitZ());
  if (x.norm() < 1e-9) x = Vec3::UnitX();
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

Terrain make_terrain(const SynthConfig& cfg, const PerceptionCuboid& cuboid) {
  Terrain t;
  const double pad = 20.0;
  t.origin = Vec2(cuboid.x_range[0] - pad, cuboid.y_range[0] - pad);
  t.cell_size = 10.0;
  const int cols = static_cast<int>(
      std::ceil((cuboid.x_range[1] + pad - t.origin.x()) / t.cell_size)) + 1;
  const int rows = static_cast<int>(
      std::ceil((cuboid.y_range[1] + pad - t.origin.y()) / t.cell_size)) + 1;
  t.grid.assign(rows, std::vector<double>(cols, 0.0));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = t.origin.x() + c * t.cell_size;
      switch (cfg.terrain) {
        case TerrainMode::Flat:
          t.grid[r][c] = 0.0;
          break;
        case TerrainMode::PlanarSlope:
          t.grid[r][c] = 1.0 + 0.002 * x;  // stays well inside Z in [0,6]
          break;
        case TerrainMode::Sinusoidal:
          t.grid[r][c] = 1.0 + 0.5 * std::sin(x / 150.0);
          break;
      }
    }
  }
  return t;
}

struct Vehicle {
  std::int64_t track;
  VehicleClass cls;
  double length, width, height;
  double lane_y;
  double x0;       // position at t = 0
  double speed;    // signed, along +X or -X
  double yaw;
};

std::vector<Vehicle> spawn_vehicles(const SynthConfig& cfg,
                                    const PerceptionCuboid& cuboid,
                                    Rng& rng) {
  const auto lanes = lane_centers(cfg);
  const auto [lo, hi] = cfg.vehicle_count_range;
  const int count = std::max(
      1, lo + static_cast<int>(std::lround(cfg.congestion * (hi - lo))));
  std::vector<Vehicle> vehicles;
  vehicles.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vehicle v;
    v.track = i + 1;
    const auto& spec = kClassSpecs[rng.uniform_index(kClassSpecs.size())];
    const double jitter = rng.uniform(0.95, 1.05);
    v.cls = spec.cls;
    v.length = spec.length * jitter;
    v.width = spec.width * jitter;
    v.height = spec.height;  // exact class height, as the lift route assumes
    const std::size_t lane = rng.uniform_index(lanes.size());
    v.lane_y = lanes[lane];
    // lanes on the positive-Y half drive +X, the rest -X
    const double dir = v.lane_y > 0 ? 1.0 : -1.0;
    v.speed = dir * rng.uniform(cfg.speed_range[0], cfg.speed_range[1]);
    v.yaw = dir > 0 ? 0.0 : M_PI;
    v.x0 = rng.uniform(cuboid.x_range[0], cuboid.x_range[1]);
    vehicles.push_back(v);
  }
  return vehicles;
}

}  // namespace

void SynthConfig::validate() const {
  if (pole_count < 1 || cameras_per_pole < 1 || lane_count < 1 ||
      clip_length < 1)
    throw ValidationError("synth.counts", "all counts must be >= 1");
  if (speed_range[0] < 0 || speed_range[1] < speed_range[0])
    throw ValidationError("synth.speed_range", "speeds must be >= 0, lo <= hi");
  if (vehicle_count_range.first < 1 ||
      vehicle_count_range.second < vehicle_count_range.first)
    throw ValidationError("synth.vehicle_count_range", "invalid range");
  if (rate_hz <= 0) throw ValidationError("synth.rate", "rate must be > 0");
  if (congestion < 0 || congestion > 1)
    throw ValidationError("synth.congestion", "must be in [0,1]");
  if (uav_px_per_meter <= 0)
    throw ValidationError("synth.uav_px_per_meter", "must be > 0");
}

std::vector<double> lane_centers(const SynthConfig& cfg) {
  std::vector<double> lanes;
  lanes.reserve(cfg.lane_count);
  // lanes straddle y = 0 symmetrically
  const double first = -0.5 * (cfg.lane_count - 1) * kLaneWidth;
  for (int i = 0; i < cfg.lane_count; ++i)
    lanes.push_back(first + i * kLaneWidth);
  return lanes;
}

SceneConfig generate_scene(const SynthConfig& cfg) {
  cfg.validate();
  SceneConfig scene;
  scene.id = "synth-" + std::to_string(cfg.seed);
  scene.cuboid = PerceptionCuboid{};

  const double span = scene.cuboid.x_range[1] - scene.cuboid.x_range[0];
  const double road_half = 0.5 * cfg.lane_count * kLaneWidth;
  if (span / cfg.pole_count < 1.0)
    throw ValidationError("synth.pole_count", "cuboid too small for poles");

  const int total_cams = cfg.pole_count * cfg.cameras_per_pole;
  int cam_index = 0;
  for (int p = 0; p < cfg.pole_count; ++p) {
    const double pole_x = scene.cuboid.x_range[0] +
                          (p + 0.5) * span / cfg.pole_count;
    const double side = (p % 2 == 0) ? 1.0 : -1.0;
    const Vec3 pole_pos(pole_x, side * (road_half + 3.0), cfg.camera_height);
    for (int c = 0; c < cfg.cameras_per_pole; ++c, ++cam_index) {
      CameraModel cam;
      cam.id = "cam" + std::to_string(cam_index);
      cam.width = 1920;
      cam.height = 1080;
      // cameras jointly tile the road: each aims at its own target slice
      const double target_x = scene.cuboid.x_range[0] +
                              (cam_index + 0.5) * span / total_cams;
      const Vec3 target(target_x, 0.0, 0.8);
      const double reach = std::abs(target_x - pole_x);
      // far targets get longer focals (near/far zoom pairing)
      cam.fx = cam.fy = std::clamp(1100.0 + 14.0 * reach, 1100.0, 6000.0);
      cam.cx = 960.0;
      cam.cy = 540.0;
      cam.rotation = look_at_rotation(target - pole_pos);
      cam.translation = pole_pos;
      scene.cameras.push_back(std::move(cam));
    }
  }

  scene.terrain = make_terrain(cfg, scene.cuboid);
  for (const auto& spec : kClassSpecs)
    scene.class_heights.heights[spec.cls] = spec.height;
  scene.validate();
  return scene;
}

SynthClip generate_clip(const SceneConfig& scene, const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto vehicles = spawn_vehicles(cfg, scene.cuboid, rng);

  // world -> UAV similarity; its inverse is the published homography
  const double s = cfg.uav_px_per_meter;
  const double ct = std::cos(cfg.uav_rotation), st = std::sin(cfg.uav_rotation);
  Mat3 world_to_uav;
  world_to_uav << s * ct, -s * st, cfg.uav_offset.x(),
                  s * st,  s * ct, cfg.uav_offset.y(),
                  0, 0, 1;
  const Homography h_world_to_uav = Homography::from_matrix(world_to_uav);
  const Homography h_uav_to_world = h_world_to_uav.inverse();

  SynthClip out;
  out.uav_to_world = h_uav_to_world;
  out.gt.scene_id = scene.id;
  out.gt.rate_hz = cfg.rate_hz;
  out.observations.resize(scene.cameras.size());
  for (std::size_t c = 0; c < scene.cameras.size(); ++c)
    out.observations[c].camera_id = scene.cameras[c].id;

  const double dt = 1.0 / cfg.rate_hz;
  for (int k = 0; k < cfg.clip_length; ++k) {
    Sample sample;
    sample.timestamp = k * dt;
    std::vector<UavBox> uav_boxes;
    for (const auto& v : vehicles) {
      const double x = v.x0 + v.speed * sample.timestamp;
      const double margin = 0.5 * std::hypot(v.length, v.width);
      if (x - margin < scene.cuboid.x_range[0] ||
          x + margin > scene.cuboid.x_range[1])
        continue;  // vehicle out of the cuboid at this time
      const double altitude = scene.terrain.altitude(Vec2(x, v.lane_y));
      Box3D box;
      box.center = Vec3(x, v.lane_y, altitude + 0.5 * v.height);
      box.size = Vec3(v.length, v.width, v.height);
      box.yaw = v.yaw;
      box.cls = v.cls;
      box.track = v.track;
      sample.boxes.push_back(box);

      UavBox ub;
      ub.track = v.track;
      ub.cls = v.cls;
      ub.rect.frame = RectFrame::UavPixels;
      ub.rect.center = apply_homography(h_world_to_uav, Vec2(x, v.lane_y));
      ub.rect.length = s * v.length;
      ub.rect.width = s * v.width;
      ub.rect.angle = normalize_angle(v.yaw + cfg.uav_rotation);
      uav_boxes.push_back(std::move(ub));
    }

    for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
      for (const auto& box : sample.boxes) {
        if (auto rect = projected_bounding_rect(scene.cameras[c], box)) {
          CameraObservation obs;
          obs.timestamp = sample.timestamp + cfg.injected_time_shift;
          obs.rect = *rect;
          out.observations[c].observations.push_back(std::move(obs));
        }
      }
    }

    out.gt.samples.push_back(std::move(sample));
    out.uav.push_back(std::move(uav_boxes));
  }
  return out;
}

}  // namespace bev3d
