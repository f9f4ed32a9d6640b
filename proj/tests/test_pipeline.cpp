#include "bev3d/pipeline.hpp"
#include "bev3d/rng.hpp"
#include "bev3d/synth.hpp"

#include <doctest.h>

using namespace bev3d;

TEST_CASE("length refinement") {
  SUBCASE("zero-height vehicle keeps its observed length") {
    CHECK(refine_length({10.0, 300.0, 0.0, 0.0}) == 10.0);
  }
  SUBCASE("reference values from the similarity formula") {
    CHECK(refine_length({10.0, 300.0, 3.0, 0.0}) ==
          doctest::Approx(9.9).epsilon(1e-12));
    // with offset: l = ((10+30)/300)*(300-3) - 30 = 9.6
    CHECK(refine_length({10.0, 300.0, 3.0, 30.0}) ==
          doctest::Approx(9.6).epsilon(1e-12));
  }
  SUBCASE("degenerate when h >= H") {
    CHECK_THROWS_AS(refine_length({10.0, 300.0, 300.0, 0.0}),
                    ValidationError);
  }
  SUBCASE("monotone decreasing in h, result never exceeds l'") {
    Rng rng(41);
    for (int i = 0; i < 1000; ++i) {
      const double lp = rng.uniform(2, 20);
      const double big_h = rng.uniform(100, 500);
      const double d = rng.uniform(0, 100);
      const double h1 = rng.uniform(0, 5), h2 = h1 + rng.uniform(0.1, 3);
      const double l1 = refine_length({lp, big_h, h1, d});
      const double l2 = refine_length({lp, big_h, h2, d});
      CHECK(l2 < l1);
      CHECK(l1 <= lp + 1e-12);
    }
  }
}

TEST_CASE("BEV rect to world") {
  RotatedRect2D rect;
  rect.frame = RectFrame::UavPixels;
  rect.center = Vec2(100, 50);
  rect.length = 40;
  rect.width = 16;
  rect.angle = 0.5;

  SUBCASE("identity homography is a no-op") {
    const auto out = bev_rect_to_world(Homography{}, rect);
    CHECK((out.center - rect.center).norm() < 1e-12);
    CHECK(out.length == doctest::Approx(rect.length));
    CHECK(out.width == doctest::Approx(rect.width));
    CHECK(out.angle == doctest::Approx(rect.angle));
  }

  SUBCASE("similarity scales dims and adds the rotation, exactly") {
    const double s = 0.125, theta = 0.3;
    Mat3 m;
    m << s * std::cos(theta), -s * std::sin(theta), 7.0,
         s * std::sin(theta), s * std::cos(theta), -3.0,
         0, 0, 1;
    double residual = -1.0;
    const auto out =
        bev_rect_to_world(Homography::from_matrix(m), rect, &residual);
    CHECK(out.length == doctest::Approx(s * rect.length).epsilon(1e-12));
    CHECK(out.width == doctest::Approx(s * rect.width).epsilon(1e-12));
    CHECK(normalize_angle(out.angle - rect.angle - theta) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(residual < 1e-12);
  }

  SUBCASE("affine map has zero fit residual, projective does not") {
    Mat3 affine;
    affine << 1.0, 0.4, 2.0, -0.2, 0.8, 1.0, 0, 0, 1;  // shear included
    double residual = -1.0;
    bev_rect_to_world(Homography::from_matrix(affine), rect, &residual);
    CHECK(residual < 1e-12);

    Mat3 proj = affine;
    proj(2, 0) = 1e-3;
    bev_rect_to_world(Homography::from_matrix(proj), rect, &residual);
    CHECK(residual > 1e-6);
  }
}

TEST_CASE("lift to 3D") {
  ClassHeightTable heights;
  heights.heights[VehicleClass::Car] = 1.5;
  heights.heights[VehicleClass::Van] = 2.0;
  heights.heights[VehicleClass::Bus] = 3.2;
  heights.heights[VehicleClass::Truck] = 3.4;

  RotatedRect2D rect;
  rect.center = Vec2(100, 5);
  rect.length = 4.5;
  rect.width = 1.8;
  rect.angle = 0.2;

  SUBCASE("flat terrain puts the center at half the class height") {
    Terrain flat;
    flat.origin = Vec2(-500, -50);
    flat.cell_size = 100;
    flat.grid.assign(2, std::vector<double>(11, 0.0));
    const auto box = lift_to_3d(rect, flat, heights, VehicleClass::Car);
    CHECK(box.center.z() == doctest::Approx(0.75));
    CHECK(box.size.z() == 1.5);
    CHECK(box.yaw == doctest::Approx(0.2));
    CHECK(box.size.x() == doctest::Approx(4.5));
  }

  SUBCASE("bilinear on a planar grid is exact") {
    Terrain slope;  // z = 0.01 * x
    slope.origin = Vec2(-500, -50);
    slope.cell_size = 100;
    slope.grid.assign(2, std::vector<double>(11, 0.0));
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 11; ++c)
        slope.grid[r][c] = 0.01 * (-500 + c * 100);
    const auto box = lift_to_3d(rect, slope, heights, VehicleClass::Van);
    CHECK(box.center.z() == doctest::Approx(1.0 + 1.0).epsilon(1e-12));
  }

  SUBCASE("center outside the grid") {
    Terrain tiny;
    tiny.origin = Vec2(0, 0);
    tiny.cell_size = 1;
    tiny.grid = {{0, 0}, {0, 0}};
    CHECK_THROWS_AS(lift_to_3d(rect, tiny, heights, VehicleClass::Car),
                    ValidationError);
  }
}

TEST_CASE("project annotations covers every camera") {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.pole_count = 6;
  cfg.cameras_per_pole = 2;
  const auto scene = generate_scene(cfg);
  REQUIRE(scene.cameras.size() == 12);

  Sample sample;
  Box3D box;
  box.center = Vec3(0, 0, 0.75);
  box.size = Vec3(4.6, 1.9, 1.5);
  box.yaw = 0;
  sample.boxes.push_back(box);
  const auto projections = project_annotations(scene, sample);
  CHECK(projections.size() == 12);
  int visible = 0;
  for (const auto& cp : projections) {
    REQUIRE(cp.boxes.size() == 1);
    if (cp.boxes[0].polygon) ++visible;
  }
  CHECK(visible >= 1);

  SUBCASE("box behind all cameras projects nowhere") {
    Sample far_sample;
    Box3D outside = box;
    outside.center = Vec3(0, 0, 500.0);  // high above every frustum
    far_sample.boxes.push_back(outside);
    const auto proj = project_annotations(scene, far_sample);
    for (const auto& cp : proj)
      if (cp.boxes[0].polygon)
        CHECK(polygon_area(*cp.boxes[0].polygon) >= 0);  // may clip to empty
  }
}

namespace {

Trajectory make_traj(std::initializer_list<std::pair<double, double>> txs,
                     double yaw = 0.0) {
  Trajectory t;
  t.track = 1;
  for (const auto& [time, x] : txs) {
    TrajectoryPoint p;
    p.timestamp = time;
    p.box.center = Vec3(x, 0, 1);
    p.box.size = Vec3(4, 2, 1.5);
    p.box.yaw = yaw;
    t.points.push_back(p);
  }
  return t;
}

}  // namespace

TEST_CASE("trajectory pruning") {
  std::vector<Trajectory> trajs;
  trajs.push_back(make_traj({{0.0, 0.0}}));                          // 0 s
  trajs.push_back(make_traj({{0.0, 0.0}, {0.5, 1.0}, {1.0, 2.0}}));  // 1 s
  trajs.push_back(make_traj({{0.0, 0.0}, {0.5, 1.0}}));              // 0.5 s
  const auto kept = prune_trajectories(trajs, 1.0);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].points.size() == 3);
  CHECK(prune_trajectories({}, 1.0).empty());
}

TEST_CASE("gap interpolation") {
  SUBCASE("midpoint fill at 2 Hz") {
    const auto t = make_traj({{0.0, 0.0}, {1.0, 2.0}});
    const auto filled = interpolate_gaps(t, 2.0);
    REQUIRE(filled.points.size() == 3);
    CHECK(filled.points[1].timestamp == doctest::Approx(0.5));
    CHECK(filled.points[1].box.center.x() == doctest::Approx(1.0));
    CHECK(filled.points[1].box.interpolated);
    CHECK(!filled.points[0].box.interpolated);
  }
  SUBCASE("no gaps is the identity") {
    const auto t = make_traj({{0.0, 0.0}, {0.5, 1.0}, {1.0, 2.0}});
    const auto filled = interpolate_gaps(t, 2.0);
    REQUIRE(filled.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(filled.points[i].box.center == t.points[i].box.center);
  }
  SUBCASE("yaw interpolates over the shortest arc") {
    auto t = make_traj({{0.0, 0.0}, {1.0, 2.0}});
    t.points[0].box.yaw = 170.0 * M_PI / 180.0;
    t.points[1].box.yaw = -170.0 * M_PI / 180.0;
    const auto filled = interpolate_gaps(t, 2.0);
    REQUIRE(filled.points.size() == 3);
    CHECK(std::abs(normalize_angle(filled.points[1].box.yaw - M_PI)) < 1e-12);
  }
  SUBCASE("idempotent") {
    const auto t = make_traj({{0.0, 0.0}, {1.5, 3.0}, {2.0, 4.0}});
    const auto once = interpolate_gaps(t, 2.0);
    const auto twice = interpolate_gaps(once, 2.0);
    REQUIRE(once.points.size() == twice.points.size());
    for (std::size_t i = 0; i < once.points.size(); ++i) {
      CHECK(once.points[i].timestamp == twice.points[i].timestamp);
      CHECK(once.points[i].box.center == twice.points[i].box.center);
    }
  }
}

TEST_CASE("time shift estimation") {
  SynthConfig cfg;
  cfg.seed = 77;
  cfg.pole_count = 2;
  cfg.clip_length = 20;
  cfg.vehicle_count_range = {8, 12};
  const auto scene = generate_scene(cfg);

  SUBCASE("zero delay") {
    const auto clip = generate_clip(scene, cfg);
    SyncConfig sync;
    CHECK(estimate_time_shift(clip.gt, clip.observations, scene, sync) == 0.0);
  }

  SUBCASE("injected +1.5 s delay is recovered") {
    auto shifted_cfg = cfg;
    shifted_cfg.injected_time_shift = 1.5;
    const auto clip = generate_clip(scene, shifted_cfg);
    SyncConfig sync;
    CHECK(estimate_time_shift(clip.gt, clip.observations, scene, sync) == 1.5);
  }

  SUBCASE("disjoint time ranges") {
    auto shifted_cfg = cfg;
    shifted_cfg.injected_time_shift = 1e4;
    const auto clip = generate_clip(scene, shifted_cfg);
    SyncConfig sync;
    CHECK_THROWS_AS(estimate_time_shift(clip.gt, clip.observations, scene, sync),
                    ValidationError);
  }
}

TEST_CASE("lift pipeline reproduces the generator ground truth") {
  SynthConfig cfg;
  cfg.seed = 99;
  cfg.clip_length = 10;
  cfg.vehicle_count_range = {10, 20};
  const auto scene = generate_scene(cfg);
  const auto clip = generate_clip(scene, cfg);

  for (std::size_t s = 0; s < clip.uav.size(); ++s) {
    REQUIRE(clip.uav[s].size() == clip.gt.samples[s].boxes.size());
    for (std::size_t b = 0; b < clip.uav[s].size(); ++b) {
      const auto& ub = clip.uav[s][b];
      const auto world_rect = bev_rect_to_world(clip.uav_to_world, ub.rect);
      const auto box = lift_to_3d(world_rect, scene.terrain,
                                  scene.class_heights, ub.cls);
      const auto& truth = clip.gt.samples[s].boxes[b];
      CHECK((box.center - truth.center).norm() < 1e-6);
      CHECK((box.size - truth.size).norm() < 1e-6);
      CHECK(std::abs(normalize_angle(box.yaw - truth.yaw)) < 1e-9);
    }
  }
}
