#include "bev3d/eval.hpp"

#include "bev3d/polygeo.hpp"
#include "bev3d/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bev3d {

namespace {

struct CurvePoint {
  double recall;
  double precision;
};

// Precision/recall points taken after each true positive; recall is
// strictly increasing along the curve.
std::vector<CurvePoint> pr_curve_points(
    const std::vector<EvalFrame>& frames, double threshold_m, int* num_gt,
    bool use_iou, double iou_threshold) {
  struct Det {
    std::size_t frame;
    std::size_t index;
    double score;
  };
  std::vector<Det> dets;
  int gt_total = 0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    gt_total += static_cast<int>(frames[f].gts.size());
    for (std::size_t d = 0; d < frames[f].dets.size(); ++d)
      dets.push_back({f, d, frames[f].dets[d].score});
  }
  *num_gt = gt_total;
  std::sort(dets.begin(), dets.end(), [](const Det& a, const Det& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.index < b.index;
  });

  std::vector<std::vector<bool>> gt_used(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f)
    gt_used[f].assign(frames[f].gts.size(), false);

  std::vector<CurvePoint> curve;
  int tp = 0, fp = 0;
  for (const auto& det : dets) {
    const auto& frame = frames[det.frame];
    const Box3D& box = frame.dets[det.index].box;
    int best_gt = -1;
    if (use_iou) {
      double best = iou_threshold;
      for (std::size_t g = 0; g < frame.gts.size(); ++g) {
        if (gt_used[det.frame][g]) continue;
        const double iou = iou3d(box, frame.gts[g]);
        if (iou >= best && (best_gt < 0 || iou > best)) {
          best = iou;
          best_gt = static_cast<int>(g);
        }
      }
    } else {
      double best = threshold_m;
      for (std::size_t g = 0; g < frame.gts.size(); ++g) {
        if (gt_used[det.frame][g]) continue;
        const double dist =
            (box.center.head<2>() - frame.gts[g].center.head<2>()).norm();
        if (dist < best) {  // strict: ties resolve to the lower index
          best = dist;
          best_gt = static_cast<int>(g);
        }
      }
    }
    if (best_gt >= 0) {
      gt_used[det.frame][best_gt] = true;
      ++tp;
      curve.push_back({static_cast<double>(tp) / gt_total,
                       static_cast<double>(tp) / (tp + fp)});
    } else {
      ++fp;
    }
  }
  return curve;
}

// Linear interpolation on the TP-event curve; precision holds the first
// point's value left of the curve and drops to 0 past the last recall.
double interp_precision(const std::vector<CurvePoint>& curve, double recall) {
  if (curve.empty()) return 0.0;
  if (recall <= curve.front().recall) return curve.front().precision;
  if (recall > curve.back().recall) return 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (recall <= curve[i].recall) {
      const double r0 = curve[i - 1].recall, r1 = curve[i].recall;
      const double p0 = curve[i - 1].precision, p1 = curve[i].precision;
      const double t = (recall - r0) / (r1 - r0);
      return p0 + t * (p1 - p0);
    }
  }
  return 0.0;
}

}  // namespace

void EvalConfig::validate() const {
  if (distance_thresholds.empty())
    throw ValidationError("eval.thresholds", "at least one threshold");
  for (std::size_t i = 0; i < distance_thresholds.size(); ++i) {
    if (distance_thresholds[i] <= 0)
      throw ValidationError("eval.thresholds", "thresholds must be > 0");
    if (i > 0 && distance_thresholds[i] <= distance_thresholds[i - 1])
      throw ValidationError("eval.thresholds", "thresholds must ascend");
  }
  if (std::find(distance_thresholds.begin(), distance_thresholds.end(),
                tp_threshold) == distance_thresholds.end())
    throw ValidationError("eval.tp_threshold",
                          "tp_threshold must be one of the thresholds");
  if (max_detections_per_sample <= 0)
    throw ValidationError("eval.max_detections", "must be > 0");
}

MatchResult match_detections(const std::vector<Box3D>& gts,
                             const std::vector<Detection>& dets,
                             double threshold_m) {
  std::vector<int> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return a < b;
  });

  MatchResult result;
  std::vector<bool> gt_used(gts.size(), false);
  for (int d : order) {
    int best_gt = -1;
    double best = threshold_m;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_used[g]) continue;
      const double dist =
          (dets[d].box.center.head<2>() - gts[g].center.head<2>()).norm();
      if (dist < best) {
        best = dist;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      gt_used[best_gt] = true;
      result.matches.emplace_back(best_gt, d, best);
    } else {
      result.unmatched_dets.push_back(d);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g)
    if (!gt_used[g]) result.unmatched_gts.push_back(static_cast<int>(g));
  return result;
}

std::optional<double> average_precision(const std::vector<EvalFrame>& frames,
                                        double threshold_m) {
  int num_gt = 0;
  const auto curve = pr_curve_points(frames, threshold_m, &num_gt,
                                     /*use_iou=*/false, 0.0);
  if (num_gt == 0) return std::nullopt;
  // 101 recall samples; drop recall < 0.1, clip precision by 0.1,
  // normalize by 0.9.
  double sum = 0.0;
  int count = 0;
  for (int i = 10; i <= 100; ++i) {
    const double r = static_cast<double>(i) / 100.0;
    sum += std::max(0.0, interp_precision(curve, r) - 0.1);
    ++count;
  }
  return sum / count / 0.9;
}

TpErrors tp_errors(const std::vector<EvalFrame>& frames, double tp_threshold) {
  double ate = 0.0, ase = 0.0, aoe = 0.0;
  int count = 0;
  for (const auto& frame : frames) {
    const auto mr = match_detections(frame.gts, frame.dets, tp_threshold);
    for (const auto& [g, d, dist] : mr.matches) {
      const Box3D& gt = frame.gts[g];
      const Box3D& det = frame.dets[d].box;
      ate += dist;
      const Vec3 min_dim = gt.size.cwiseMin(det.size);
      const double inter = min_dim.prod();
      ase += 1.0 - inter / (gt.volume() + det.volume() - inter);
      aoe += std::abs(normalize_angle(det.yaw - gt.yaw));
      ++count;
    }
  }
  TpErrors e;
  if (count > 0) {
    e.ate = ate / count;
    e.ase = ase / count;
    e.aoe = aoe / count;
    // The data model carries no velocity/attribute fields, which is
    // equivalent to both sides reporting zeros: the error over matches
    // is identically 0. With no matches the protocol scores 1.0.
    e.ave = 0.0;
    e.aae = 0.0;
  }
  return e;
}

double nds(double map, const std::map<TpMetric, double>& tp_summaries,
           const EvalConfig& config) {
  double sum = 5.0 * map;
  int n = 0;
  for (TpMetric m : config.tp_metrics) {
    const auto it = tp_summaries.find(m);
    const double v = it != tp_summaries.end() ? it->second : 1.0;
    sum += 1.0 - std::min(1.0, v);
    ++n;
  }
  return sum / (5.0 + n);
}

EvalResult evaluate(const std::vector<Clip>& gt_clips,
                    const std::vector<DetectionClip>& det_clips,
                    const EvalConfig& config) {
  config.validate();

  std::map<std::string, const Clip*> gt_by_id;
  for (const auto& c : gt_clips) gt_by_id[c.scene_id] = &c;

  // Assemble per-class frames keyed by (clip, sample).
  std::map<VehicleClass, std::vector<EvalFrame>> frames;
  for (VehicleClass c : kAllClasses) frames[c] = {};

  std::map<std::string, const DetectionClip*> det_by_id;
  for (const auto& dc : det_clips) {
    if (!gt_by_id.count(dc.clip_id))
      throw ValidationError("evaluate.detections",
                            "unknown clip '" + dc.clip_id + "'");
    det_by_id[dc.clip_id] = &dc;
  }

  for (const auto& gt_clip : gt_clips) {
    const DetectionClip* dc = nullptr;
    if (auto it = det_by_id.find(gt_clip.scene_id); it != det_by_id.end())
      dc = it->second;
    if (dc && dc->samples.size() > gt_clip.samples.size())
      throw ValidationError("evaluate.detections",
                            "clip '" + gt_clip.scene_id +
                                "' has more samples than ground truth");
    for (std::size_t s = 0; s < gt_clip.samples.size(); ++s) {
      std::vector<Detection> dets;
      if (dc && s < dc->samples.size()) dets = dc->samples[s].detections;
      std::erase_if(dets, [&](const Detection& d) {
        return d.score < config.score_floor;
      });
      if (static_cast<int>(dets.size()) > config.max_detections_per_sample) {
        std::sort(dets.begin(), dets.end(),
                  [](const Detection& a, const Detection& b) {
                    return a.score > b.score;
                  });
        dets.resize(config.max_detections_per_sample);
      }
      for (VehicleClass c : kAllClasses) {
        EvalFrame frame;
        for (const auto& b : gt_clip.samples[s].boxes)
          if (b.cls == c) frame.gts.push_back(b);
        for (const auto& d : dets)
          if (d.box.cls == c) frame.dets.push_back(d);
        if (!frame.gts.empty() || !frame.dets.empty())
          frames[c].push_back(std::move(frame));
      }
    }
  }

  EvalResult result;
  double ap_sum = 0.0, ate = 0.0, ase = 0.0, aoe = 0.0;
  int ap_count = 0, class_count = 0;
  for (VehicleClass c : kAllClasses) {
    int num_gt = 0;
    for (const auto& f : frames[c]) num_gt += static_cast<int>(f.gts.size());
    if (num_gt == 0) {
      result.classes_without_gt.push_back(c);
      continue;
    }
    ClassResult cr;
    cr.num_gt = num_gt;
    for (double t : config.distance_thresholds) {
      const auto ap = average_precision(frames[c], t);
      cr.ap[t] = ap.value_or(0.0);
      ap_sum += cr.ap[t];
      ++ap_count;
    }
    cr.errors = tp_errors(frames[c], config.tp_threshold);
    ate += cr.errors.ate;
    ase += cr.errors.ase;
    aoe += cr.errors.aoe;
    ++class_count;
    result.per_class[c] = std::move(cr);
  }

  if (ap_count > 0) result.map = ap_sum / ap_count;
  if (class_count > 0) {
    result.mate = ate / class_count;
    result.mase = ase / class_count;
    result.maoe = aoe / class_count;
    double ave = 0.0, aae = 0.0;
    for (const auto& [c, cr] : result.per_class) {
      ave += cr.errors.ave;
      aae += cr.errors.aae;
    }
    result.mave = ave / class_count;
    result.maae = aae / class_count;
  }
  const std::map<TpMetric, double> summaries{{TpMetric::ATE, result.mate},
                                             {TpMetric::ASE, result.mase},
                                             {TpMetric::AOE, result.maoe},
                                             {TpMetric::AVE, result.mave},
                                             {TpMetric::AAE, result.maae}};
  result.nds = nds(result.map, summaries, config);
  return result;
}

double ap40(const std::vector<EvalFrame>& frames, double iou_threshold) {
  // Appendix protocol: confidence >= 0.1, at most 300 detections per image.
  std::vector<EvalFrame> filtered = frames;
  for (auto& f : filtered) {
    std::erase_if(f.dets, [](const Detection& d) { return d.score < 0.1; });
    if (f.dets.size() > 300) {
      std::sort(f.dets.begin(), f.dets.end(),
                [](const Detection& a, const Detection& b) {
                  return a.score > b.score;
                });
      f.dets.resize(300);
    }
  }
  int num_gt = 0;
  const auto curve =
      pr_curve_points(filtered, 0.0, &num_gt, /*use_iou=*/true, iou_threshold);
  if (num_gt == 0) return 0.0;
  double sum = 0.0;
  for (int i = 1; i <= 40; ++i) {
    const double r = static_cast<double>(i) / 40.0;
    double best = 0.0;  // max precision at recall >= r
    for (const auto& p : curve)
      if (p.recall >= r - 1e-12) best = std::max(best, p.precision);
    sum += best;
  }
  return sum / 40.0;
}

void PerturbParams::validate() const {
  if (pan_sigma_deg < 0 || tilt_sigma_deg < 0 || zoom_sigma < 0)
    throw ValidationError("perturb.sigmas", "sigmas must be >= 0");
}

SceneConfig drop_cameras(const SceneConfig& scene, int k, std::uint64_t seed) {
  const int n = static_cast<int>(scene.cameras.size());
  if (k < 0 || k >= n)
    throw ValidationError("drop_cameras.k", "k must satisfy 0 <= k < cameras");
  Rng rng(seed);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<bool> dropped(n, false);
  for (int i = 0; i < k; ++i) dropped[idx[i]] = true;
  SceneConfig out = scene;
  out.cameras.clear();
  for (int i = 0; i < n; ++i)
    if (!dropped[i]) out.cameras.push_back(scene.cameras[i]);
  return out;
}

std::vector<CameraModel> perturb_cameras(const std::vector<CameraModel>& cams,
                                         const PerturbParams& params) {
  params.validate();
  Rng rng(params.seed);
  const double deg = M_PI / 180.0;
  std::vector<CameraModel> out;
  out.reserve(cams.size());
  for (const auto& cam : cams) {
    const double pan = rng.normal(0.0, params.pan_sigma_deg) * deg;
    const double tilt = rng.normal(0.0, params.tilt_sigma_deg) * deg;
    double zoom = rng.normal(params.zoom_mean, params.zoom_sigma);
    while (zoom <= 0.0) zoom = rng.normal(params.zoom_mean, params.zoom_sigma);
    Mat3 ry, rx;  // pan about the camera up axis, tilt about the right axis
    ry = Eigen::AngleAxisd(pan, Vec3::UnitY()).toRotationMatrix();
    rx = Eigen::AngleAxisd(tilt, Vec3::UnitX()).toRotationMatrix();
    CameraModel p = cam;
    p.rotation = cam.rotation * ry * rx;
    p.fx = cam.fx * zoom;
    p.fy = cam.fy * zoom;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace bev3d
