#pragma once

#include "bev3d/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bev3d {

enum class TpMetric { ATE, ASE, AOE, AVE, AAE };

struct EvalConfig {
  std::vector<double> distance_thresholds{0.5, 1.0, 2.0, 4.0};  // meters
  double tp_threshold = 2.0;
  std::set<TpMetric> tp_metrics{TpMetric::ATE, TpMetric::ASE, TpMetric::AOE,
                                TpMetric::AVE, TpMetric::AAE};
  int max_detections_per_sample = 500;
  double score_floor = 0.0;

  void validate() const;
};

struct DetectionSample {
  double timestamp = 0.0;
  std::vector<Detection> detections;
};

struct DetectionClip {
  std::string clip_id;
  std::vector<DetectionSample> samples;
};

struct MatchResult {
  // (gt index, det index, BEV center distance), in match order
  std::vector<std::tuple<int, int, double>> matches;
  std::vector<int> unmatched_gts;
  std::vector<int> unmatched_dets;
};

// Greedy center-distance matching: detections in descending score order,
// each taking the nearest unmatched GT within the threshold (ties to the
// lower GT index).
MatchResult match_detections(const std::vector<Box3D>& gts,
                             const std::vector<Detection>& dets,
                             double threshold_m);

/// One evaluation frame: ground truths and detections that share a
/// (clip, sample) key.
struct EvalFrame {
  std::vector<Box3D> gts;
  std::vector<Detection> dets;
};

// nuScenes-convention AP at one distance threshold over a set of frames,
// single class. nullopt when the frames contain no GT of the class.
std::optional<double> average_precision(const std::vector<EvalFrame>& frames,
                                        double threshold_m);

struct TpErrors {
  double ate = 1.0;  // mean BEV center distance, meters
  double ase = 1.0;  // mean 1 - aligned IoU
  double aoe = 1.0;  // mean yaw difference in [0, pi], radians
  double ave = 1.0;  // 1.0 unless velocity fields exist (they do not here)
  double aae = 1.0;
};

// TP errors over the matches at the TP threshold; every error is 1.0 when
// there are no matches (protocol convention).
TpErrors tp_errors(const std::vector<EvalFrame>& frames, double tp_threshold);

// NDS = (5*mAP + sum_k (1 - min(1, mTP_k))) / (5 + |tp_metrics|).
double nds(double map, const std::map<TpMetric, double>& tp_summaries,
           const EvalConfig& config);

struct ClassResult {
  std::map<double, double> ap;  // threshold -> AP
  TpErrors errors;
  int num_gt = 0;
};

struct EvalResult {
  double map = 0.0;
  double mate = 1.0, mase = 1.0, maoe = 1.0, mave = 1.0, maae = 1.0;
  double nds = 0.0;
  std::map<VehicleClass, ClassResult> per_class;
  std::vector<VehicleClass> classes_without_gt;
};

EvalResult evaluate(const std::vector<Clip>& gt_clips,
                    const std::vector<DetectionClip>& det_clips,
                    const EvalConfig& config = {});

// KITTI-style 40-recall-point AP over monocular frames, greedy score-order
// matching by 3D IoU. Applies the score >= 0.1 filter and the 300
// detections-per-image cap before matching.
double ap40(const std::vector<EvalFrame>& frames, double iou_threshold);

struct PerturbParams {
  double pan_sigma_deg = 3.33;
  double tilt_sigma_deg = 1.67;
  double zoom_mean = 1.0;
  double zoom_sigma = 0.03;
  std::uint64_t seed = 0;

  void validate() const;
};

// Drops exactly k distinct cameras, uniformly at random under the seed.
SceneConfig drop_cameras(const SceneConfig& scene, int k, std::uint64_t seed);

// Pan/tilt rotations in camera-local axes plus a multiplicative zoom on
// the focal lengths; deterministic under the seed.
std::vector<CameraModel> perturb_cameras(const std::vector<CameraModel>& cams,
                                         const PerturbParams& params);

}  // namespace bev3d
