#include "bev3d/eval.hpp"
#include "bev3d/rng.hpp"
#include "bev3d/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bev3d;

namespace {

Box3D gt_box(double x, double y, VehicleClass cls = VehicleClass::Car,
             double yaw = 0.0) {
  Box3D b;
  b.center = Vec3(x, y, 0.75);
  b.size = Vec3(4.6, 1.9, 1.5);
  b.yaw = yaw;
  b.cls = cls;
  return b;
}

Detection det_box(double x, double y, double score,
                  VehicleClass cls = VehicleClass::Car, double yaw = 0.0) {
  Detection d;
  d.box = gt_box(x, y, cls, yaw);
  d.score = score;
  return d;
}

// frames with partially detected GT, localization noise, duplicates and
// false positives; scores are sometimes quantized to force ties
std::vector<EvalFrame> random_frames(Rng& rng, int count) {
  std::vector<EvalFrame> frames(count);
  for (auto& f : frames) {
    const int ngt = static_cast<int>(rng.uniform_index(6));
    for (int g = 0; g < ngt; ++g) {
      f.gts.push_back(gt_box(rng.uniform(-80, 80), rng.uniform(-12, 12)));
      if (rng.uniform() < 0.8) {
        Detection d;
        d.box = f.gts.back();
        d.box.center.x() += rng.uniform(-3, 3);
        d.box.center.y() += rng.uniform(-3, 3);
        d.score = rng.uniform(0, 1);
        if (rng.uniform() < 0.5) d.score = std::round(d.score * 10) / 10;
        f.dets.push_back(d);
      }
    }
    const int nfp = static_cast<int>(rng.uniform_index(4));
    for (int k = 0; k < nfp; ++k)
      f.dets.push_back(det_box(rng.uniform(-80, 80), rng.uniform(-12, 12),
                               rng.uniform(0, 1)));
  }
  return frames;
}

}  // namespace

TEST_CASE("greedy matching") {
  SUBCASE("nearest unmatched GT wins, in score order") {
    std::vector<Box3D> gts = {gt_box(0, 0), gt_box(10, 0)};
    std::vector<Detection> dets = {det_box(9.5, 0, 0.9), det_box(0.5, 0, 0.8),
                                   det_box(50, 0, 0.7)};
    const auto mr = match_detections(gts, dets, 2.0);
    REQUIRE(mr.matches.size() == 2);
    CHECK(std::get<0>(mr.matches[0]) == 1);
    CHECK(std::get<1>(mr.matches[0]) == 0);
    CHECK(std::get<2>(mr.matches[0]) == doctest::Approx(0.5));
    CHECK(std::get<0>(mr.matches[1]) == 0);
    REQUIRE(mr.unmatched_dets.size() == 1);
    CHECK(mr.unmatched_dets[0] == 2);
    CHECK(mr.unmatched_gts.empty());
  }

  SUBCASE("one GT absorbs only one detection") {
    std::vector<Box3D> gts = {gt_box(0, 0)};
    std::vector<Detection> dets = {det_box(0.1, 0, 0.9), det_box(-0.1, 0, 0.8)};
    const auto mr = match_detections(gts, dets, 2.0);
    CHECK(mr.matches.size() == 1);
    CHECK(mr.unmatched_dets.size() == 1);
  }

  SUBCASE("distance at the threshold does not match") {
    std::vector<Box3D> gts = {gt_box(0, 0)};
    std::vector<Detection> dets = {det_box(2.0, 0, 0.9)};
    const auto mr = match_detections(gts, dets, 2.0);
    CHECK(mr.matches.empty());
  }
}

TEST_CASE("average precision") {
  SUBCASE("perfect detections give AP = 1") {
    std::vector<EvalFrame> frames(3);
    for (int f = 0; f < 3; ++f) {
      frames[f].gts = {gt_box(10.0 * f, 0), gt_box(10.0 * f, 5)};
      for (const auto& g : frames[f].gts) {
        Detection d;
        d.box = g;
        d.score = 0.9;
        frames[f].dets.push_back(d);
      }
    }
    CHECK(*average_precision(frames, 2.0) == doctest::Approx(1.0));
  }

  SUBCASE("no ground truth") {
    std::vector<EvalFrame> frames(1);
    frames[0].dets = {det_box(0, 0, 0.5)};
    CHECK(!average_precision(frames, 2.0));
  }

  SUBCASE("all detections wrong give AP = 0") {
    std::vector<EvalFrame> frames(1);
    frames[0].gts = {gt_box(0, 0)};
    frames[0].dets = {det_box(100, 0, 0.5)};
    CHECK(*average_precision(frames, 2.0) == 0.0);
  }

  SUBCASE("agrees with the brute-force oracle") {
    Rng rng(61);
    for (int trial = 0; trial < 40; ++trial) {
      const auto frames = random_frames(rng, 5);
      for (double t : {0.5, 1.0, 2.0, 4.0}) {
        const auto ap = average_precision(frames, t);
        const auto expected = oracle::brute_force_ap(frames, t);
        REQUIRE(ap.has_value() == expected.has_value());
        if (ap) CHECK(std::abs(*ap - *expected) < 1e-12);
      }
    }
  }

  SUBCASE("monotone in the distance threshold") {
    Rng rng(62);
    for (int trial = 0; trial < 20; ++trial) {
      const auto frames = random_frames(rng, 4);
      double prev = -1.0;
      for (double t : {0.5, 1.0, 2.0, 4.0}) {
        const auto ap = average_precision(frames, t);
        if (!ap) break;
        CHECK(*ap >= prev - 1e-12);
        prev = *ap;
      }
    }
  }
}

TEST_CASE("true-positive errors") {
  SUBCASE("perfect detections score zero everywhere") {
    std::vector<EvalFrame> frames(1);
    frames[0].gts = {gt_box(0, 0, VehicleClass::Car, 0.4)};
    Detection d;
    d.box = frames[0].gts[0];
    d.score = 0.9;
    frames[0].dets = {d};
    const auto e = tp_errors(frames, 2.0);
    CHECK(e.ate == 0.0);
    CHECK(e.ase == 0.0);
    CHECK(e.aoe == 0.0);
    CHECK(e.ave == 0.0);
    CHECK(e.aae == 0.0);
  }

  SUBCASE("1 m offset gives ATE = 1") {
    std::vector<EvalFrame> frames(1);
    frames[0].gts = {gt_box(0, 0)};
    frames[0].dets = {det_box(1.0, 0, 0.9)};
    CHECK(tp_errors(frames, 2.0).ate == doctest::Approx(1.0));
  }

  SUBCASE("doubled length gives ASE = 0.5") {
    std::vector<EvalFrame> frames(1);
    Box3D g = gt_box(0, 0);
    g.size = Vec3(2.0, 2.0, 1.5);
    frames[0].gts = {g};
    Detection d;
    d.box = g;
    d.box.size = Vec3(4.0, 2.0, 1.5);
    d.score = 0.9;
    frames[0].dets = {d};
    CHECK(tp_errors(frames, 2.0).ase == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("yaw error uses the wrapped absolute difference") {
    std::vector<EvalFrame> frames(1);
    frames[0].gts = {gt_box(0, 0, VehicleClass::Car, 3.0)};
    frames[0].dets = {det_box(0, 0, 0.9, VehicleClass::Car, -3.0)};
    // 6 radians wraps to 2*pi - 6
    CHECK(tp_errors(frames, 2.0).aoe ==
          doctest::Approx(2 * M_PI - 6.0).epsilon(1e-12));
  }

  SUBCASE("no matches scores 1.0 across the board") {
    std::vector<EvalFrame> frames(1);
    frames[0].gts = {gt_box(0, 0)};
    frames[0].dets = {det_box(100, 0, 0.9)};
    const auto e = tp_errors(frames, 2.0);
    CHECK(e.ate == 1.0);
    CHECK(e.ase == 1.0);
    CHECK(e.aoe == 1.0);
    CHECK(e.ave == 1.0);
    CHECK(e.aae == 1.0);
  }
}

TEST_CASE("NDS formula") {
  EvalConfig cfg;
  SUBCASE("hand example") {
    std::map<TpMetric, double> tp{{TpMetric::ATE, 0.5},
                                  {TpMetric::ASE, 0.5},
                                  {TpMetric::AOE, 0.5},
                                  {TpMetric::AVE, 0.5},
                                  {TpMetric::AAE, 0.5}};
    CHECK(nds(0.4, tp, cfg) == doctest::Approx(0.45).epsilon(1e-12));
  }
  SUBCASE("errors clamp at 1") {
    std::map<TpMetric, double> tp{{TpMetric::ATE, 3.7},
                                  {TpMetric::ASE, 1.0},
                                  {TpMetric::AOE, 1.0},
                                  {TpMetric::AVE, 1.0},
                                  {TpMetric::AAE, 1.0}};
    CHECK(nds(0.4, tp, cfg) == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("perfect everything is exactly 1") {
    std::map<TpMetric, double> tp{{TpMetric::ATE, 0.0},
                                  {TpMetric::ASE, 0.0},
                                  {TpMetric::AOE, 0.0},
                                  {TpMetric::AVE, 0.0},
                                  {TpMetric::AAE, 0.0}};
    CHECK(nds(1.0, tp, cfg) == 1.0);
  }
}

TEST_CASE("full evaluation") {
  SynthConfig cfg;
  cfg.seed = 42;
  cfg.clip_length = 8;
  cfg.vehicle_count_range = {15, 25};
  const auto scene = generate_scene(cfg);
  const auto clip = generate_clip(scene, cfg);

  SUBCASE("ground truth as detections gives NDS = 1") {
    DetectionClip dc;
    dc.clip_id = clip.gt.scene_id;
    for (const auto& s : clip.gt.samples) {
      DetectionSample ds;
      ds.timestamp = s.timestamp;
      for (const auto& b : s.boxes) {
        Detection d;
        d.box = b;
        d.score = 0.9;
        ds.detections.push_back(d);
      }
      dc.samples.push_back(std::move(ds));
    }
    const auto r = evaluate({clip.gt}, {dc});
    CHECK(r.map == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.mate == 0.0);
    CHECK(r.mase == 0.0);
    CHECK(r.maoe == 0.0);
    CHECK(r.nds == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& [cls, cr] : r.per_class) {
      CHECK(cr.num_gt > 0);
      for (const auto& [t, ap] : cr.ap) CHECK(ap == doctest::Approx(1.0));
    }
  }

  SUBCASE("no detections at all") {
    const auto r = evaluate({clip.gt}, {});
    CHECK(r.map == 0.0);
    CHECK(r.mate == 1.0);
    CHECK(r.nds == 0.0);
  }

  SUBCASE("detections for an unknown clip are rejected") {
    DetectionClip dc;
    dc.clip_id = "nope";
    CHECK_THROWS_AS(evaluate({clip.gt}, {dc}), ValidationError);
  }

  SUBCASE("more detection samples than ground truth are rejected") {
    DetectionClip dc;
    dc.clip_id = clip.gt.scene_id;
    dc.samples.resize(clip.gt.samples.size() + 1);
    CHECK_THROWS_AS(evaluate({clip.gt}, {dc}), ValidationError);
  }

  SUBCASE("score floor filters detections") {
    DetectionClip dc;
    dc.clip_id = clip.gt.scene_id;
    DetectionSample ds;
    for (const auto& b : clip.gt.samples[0].boxes) {
      Detection d;
      d.box = b;
      d.score = 0.05;
      ds.detections.push_back(d);
    }
    dc.samples.push_back(ds);
    EvalConfig ec;
    ec.score_floor = 0.1;
    const auto r = evaluate({clip.gt}, {dc}, ec);
    CHECK(r.map == 0.0);
  }
}

TEST_CASE("AP40") {
  SUBCASE("perfect detections give 1") {
    std::vector<EvalFrame> frames(2);
    for (auto& f : frames) {
      f.gts = {gt_box(0, 0), gt_box(20, 3)};
      for (const auto& g : f.gts) {
        Detection d;
        d.box = g;
        d.score = 0.9;
        f.dets.push_back(d);
      }
    }
    CHECK(ap40(frames, 0.7) == doctest::Approx(1.0));
  }

  SUBCASE("low-confidence detections are filtered out") {
    std::vector<EvalFrame> frames(1);
    frames[0].gts = {gt_box(0, 0)};
    Detection d;
    d.box = frames[0].gts[0];
    d.score = 0.05;  // below the 0.1 protocol floor
    frames[0].dets = {d};
    CHECK(ap40(frames, 0.5) == 0.0);
  }

  SUBCASE("no ground truth gives 0") {
    std::vector<EvalFrame> frames(1);
    frames[0].dets = {det_box(0, 0, 0.9)};
    CHECK(ap40(frames, 0.5) == 0.0);
  }

  SUBCASE("agrees with the brute-force oracle") {
    Rng rng(63);
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<EvalFrame> frames(4);
      for (auto& f : frames) {
        const int ngt = 1 + static_cast<int>(rng.uniform_index(4));
        for (int g = 0; g < ngt; ++g) {
          const auto box = gt_box(rng.uniform(-60, 60), rng.uniform(-10, 10),
                                  VehicleClass::Car, rng.uniform(-M_PI, M_PI));
          f.gts.push_back(box);
          if (rng.uniform() < 0.85) {
            Detection d;
            d.box = box;
            d.box.center.x() += rng.uniform(-0.8, 0.8);
            d.box.center.y() += rng.uniform(-0.4, 0.4);
            d.box.yaw += rng.uniform(-0.2, 0.2);
            d.score = rng.uniform(0, 1);  // sometimes below the 0.1 floor
            f.dets.push_back(d);
          }
        }
        if (rng.uniform() < 0.5)
          f.dets.push_back(
              det_box(rng.uniform(-60, 60), rng.uniform(-10, 10), 0.6));
      }
      for (double iou : {0.25, 0.5}) {
        CHECK(std::abs(ap40(frames, iou) -
                       oracle::brute_force_ap40(frames, iou)) < 1e-12);
      }
    }
  }
}

TEST_CASE("camera dropping") {
  SynthConfig cfg;
  cfg.seed = 3;
  const auto scene = generate_scene(cfg);  // 8 cameras

  SUBCASE("drops exactly k, keeps order, deterministic") {
    const auto a = drop_cameras(scene, 3, 99);
    const auto b = drop_cameras(scene, 3, 99);
    REQUIRE(a.cameras.size() == scene.cameras.size() - 3);
    REQUIRE(b.cameras.size() == a.cameras.size());
    for (std::size_t i = 0; i < a.cameras.size(); ++i)
      CHECK(a.cameras[i].id == b.cameras[i].id);
    // survivors appear in the original relative order
    std::size_t pos = 0;
    for (const auto& cam : a.cameras) {
      while (pos < scene.cameras.size() && scene.cameras[pos].id != cam.id)
        ++pos;
      CHECK(pos < scene.cameras.size());
      ++pos;
    }
  }

  SUBCASE("different seeds reach every camera eventually") {
    std::set<std::string> dropped;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      const auto sub = drop_cameras(scene, 1, seed);
      std::set<std::string> kept;
      for (const auto& c : sub.cameras) kept.insert(c.id);
      for (const auto& c : scene.cameras)
        if (!kept.count(c.id)) dropped.insert(c.id);
    }
    CHECK(dropped.size() == scene.cameras.size());
  }

  SUBCASE("invalid k") {
    CHECK_THROWS_AS(drop_cameras(scene, -1, 0), ValidationError);
    CHECK_THROWS_AS(
        drop_cameras(scene, static_cast<int>(scene.cameras.size()), 0),
        ValidationError);
  }
}

TEST_CASE("camera perturbation") {
  // many copies of one camera, so the drawn pan/tilt/zoom form a sample
  // whose moments are checkable
  CameraModel base;
  base.id = "c";
  base.width = 1920;
  base.height = 1080;
  base.fx = base.fy = 2000.0;
  base.cx = 960.0;
  base.cy = 540.0;
  const int n = 8000;
  std::vector<CameraModel> cams(n, base);

  PerturbParams params;
  params.seed = 123;
  const auto out = perturb_cameras(cams, params);
  REQUIRE(out.size() == cams.size());

  SUBCASE("deterministic under the seed") {
    const auto again = perturb_cameras(cams, params);
    for (int i = 0; i < n; ++i) {
      CHECK((again[i].rotation - out[i].rotation).norm() == 0.0);
      CHECK(again[i].fx == out[i].fx);
    }
    PerturbParams other = params;
    other.seed = 124;
    const auto different = perturb_cameras(cams, other);
    CHECK((different[0].rotation - out[0].rotation).norm() > 0.0);
  }

  SUBCASE("recovered angles match the configured spreads") {
    double pan_sq = 0.0, tilt_sq = 0.0, zoom_sum = 0.0, zoom_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      // local increment M = R0^T R' = Ry(pan) Rx(tilt)
      const Mat3 m = base.rotation.transpose() * out[i].rotation;
      const double pan = std::atan2(-m(2, 0), m(0, 0));
      const double tilt = std::atan2(-m(1, 2), m(1, 1));
      pan_sq += pan * pan;
      tilt_sq += tilt * tilt;
      const double zoom = out[i].fx / base.fx;
      CHECK(zoom > 0.0);
      CHECK(out[i].fy / base.fy == doctest::Approx(zoom).epsilon(1e-12));
      zoom_sum += zoom;
      zoom_sq += zoom * zoom;
    }
    const double deg = 180.0 / M_PI;
    CHECK(std::sqrt(pan_sq / n) * deg == doctest::Approx(3.33).epsilon(0.06));
    CHECK(std::sqrt(tilt_sq / n) * deg == doctest::Approx(1.67).epsilon(0.06));
    const double zoom_mean = zoom_sum / n;
    CHECK(zoom_mean == doctest::Approx(1.0).epsilon(0.005));
    CHECK(std::sqrt(zoom_sq / n - zoom_mean * zoom_mean) ==
          doctest::Approx(0.03).epsilon(0.06));
  }

  SUBCASE("principal point and image size are untouched") {
    for (int i = 0; i < 100; ++i) {
      CHECK(out[i].cx == base.cx);
      CHECK(out[i].cy == base.cy);
      CHECK(out[i].width == base.width);
      CHECK(out[i].height == base.height);
      // rotation stays orthonormal
      CHECK((out[i].rotation.transpose() * out[i].rotation -
             Mat3::Identity()).norm() < 1e-12);
    }
  }
}
