#include "bev3d/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace bev3d {

void LengthRefinementInput::validate() const {
  if (observed_length <= 0)
    throw ValidationError("length_refine.observed_length", "must be > 0");
  if (vehicle_height < 0)
    throw ValidationError("length_refine.vehicle_height", "must be >= 0");
  if (uav_height <= vehicle_height)
    throw ValidationError("length_refine.uav_height",
                          "UAV height must exceed vehicle height");
  if (offset < 0)
    throw ValidationError("length_refine.offset", "must be >= 0");
}

double refine_length(const LengthRefinementInput& in) {
  in.validate();
  return (in.observed_length + in.offset) / in.uav_height *
             (in.uav_height - in.vehicle_height) -
         in.offset;
}

RotatedRect2D bev_rect_to_world(const Homography& uav_to_world,
                                const RotatedRect2D& rect,
                                double* fit_residual) {
  const auto corners = rect.corners();
  std::array<Vec2, 4> q;
  for (int i = 0; i < 4; ++i) q[i] = apply_homography(uav_to_world, corners[i]);

  // corner order: 0=(+l,+w) 1=(-l,+w) 2=(-l,-w) 3=(+l,-w)
  const Vec2 len1 = q[0] - q[1], len2 = q[3] - q[2];  // along the length axis
  const Vec2 wid1 = q[0] - q[3], wid2 = q[1] - q[2];

  RotatedRect2D out;
  out.frame = RectFrame::WorldGround;
  out.center = 0.25 * (q[0] + q[1] + q[2] + q[3]);
  out.length = 0.5 * (len1.norm() + len2.norm());
  out.width = 0.5 * (wid1.norm() + wid2.norm());
  const Vec2 dir = len1 + len2;
  out.angle = std::atan2(dir.y(), dir.x());

  if (fit_residual) {
    // Opposite edges of the mapped quad agree exactly iff the map was
    // affine on the rect; the residual measures the projective bend.
    *fit_residual = std::max((len1 - len2).norm(), (wid1 - wid2).norm());
  }
  return out;
}

Box3D lift_to_3d(const RotatedRect2D& rect, const Terrain& terrain,
                 const ClassHeightTable& heights, VehicleClass cls) {
  const double altitude = terrain.altitude(rect.center);
  const double h = heights.at(cls);
  Box3D box;
  box.center = Vec3(rect.center.x(), rect.center.y(), altitude + 0.5 * h);
  box.size = Vec3(rect.length, rect.width, h);
  box.yaw = normalize_angle(rect.angle);
  box.cls = cls;
  return box;
}

std::vector<CameraProjections> project_annotations(const SceneConfig& scene,
                                                   const Sample& sample) {
  std::vector<CameraProjections> out;
  out.reserve(scene.cameras.size());
  for (const auto& cam : scene.cameras) {
    CameraProjections cp;
    cp.camera_id = cam.id;
    cp.boxes.reserve(sample.boxes.size());
    for (std::size_t b = 0; b < sample.boxes.size(); ++b) {
      BoxProjection bp;
      bp.box_index = static_cast<int>(b);
      const auto corners = box3d_corners(sample.boxes[b]);
      for (int i = 0; i < 8; ++i)
        bp.corners[i] = project_world_to_image(cam, corners[i]);
      bp.polygon = box3d_image_polygon(cam, sample.boxes[b]);
      cp.boxes.push_back(std::move(bp));
    }
    out.push_back(std::move(cp));
  }
  return out;
}

std::vector<Trajectory> prune_trajectories(std::vector<Trajectory> trajs,
                                           double min_duration) {
  std::erase_if(trajs, [&](const Trajectory& t) {
    return t.duration() < min_duration;
  });
  return trajs;
}

Trajectory interpolate_gaps(const Trajectory& traj, double rate_hz) {
  if (rate_hz <= 0)
    throw ValidationError("interpolate_gaps.rate", "rate must be > 0");
  const double dt = 1.0 / rate_hz;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const double frames = traj.points[i].timestamp * rate_hz;
    if (std::abs(frames - std::round(frames)) > 1e-6 * rate_hz)
      throw ValidationError(
          "interpolate_gaps.points[" + std::to_string(i) + "]",
          "timestamp is not a multiple of the frame period");
  }

  Trajectory out;
  out.track = traj.track;
  out.cls = traj.cls;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const auto& cur = traj.points[i];
    if (!out.points.empty()) {
      const TrajectoryPoint prev = out.points.back();  // copy: push_back below
      const long gap = std::lround((cur.timestamp - prev.timestamp) / dt);
      const double yaw_delta =
          normalize_angle(cur.box.yaw - prev.box.yaw);  // shortest arc
      for (long g = 1; g < gap; ++g) {
        const double alpha = static_cast<double>(g) / gap;
        TrajectoryPoint p;
        p.timestamp = prev.timestamp + g * dt;
        p.box = prev.box;
        p.box.center =
            (1.0 - alpha) * prev.box.center + alpha * cur.box.center;
        p.box.size = (1.0 - alpha) * prev.box.size + alpha * cur.box.size;
        p.box.yaw = normalize_angle(prev.box.yaw + alpha * yaw_delta);
        p.box.interpolated = true;
        out.points.push_back(std::move(p));
      }
    }
    out.points.push_back(cur);
  }
  return out;
}

void SyncConfig::validate() const {
  if (shift_step <= 0)
    throw ValidationError("sync.shift_step", "must be > 0");
  if (shift_range[0] >= shift_range[1])
    throw ValidationError("sync.shift_range", "range must satisfy lo < hi");
}

std::optional<RotatedRect2D> projected_bounding_rect(const CameraModel& camera,
                                                     const Box3D& box) {
  const auto poly = box3d_image_polygon(camera, box);
  if (!poly) return std::nullopt;
  Vec2 lo(std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& v : poly->vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  if ((hi - lo).minCoeff() <= 0) return std::nullopt;
  RotatedRect2D rect;
  rect.frame = RectFrame::ImagePixels;
  rect.center = 0.5 * (lo + hi);
  rect.length = hi.x() - lo.x();
  rect.width = hi.y() - lo.y();
  rect.angle = 0.0;
  return rect;
}

namespace {

// Greedy best-IoU matching; unmatched observations score 0.
double greedy_iou_score(const std::vector<RotatedRect2D>& predicted,
                        const std::vector<const RotatedRect2D*>& observed,
                        double* total) {
  struct Pair {
    double iou;
    std::size_t pred, obs;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < predicted.size(); ++p)
    for (std::size_t o = 0; o < observed.size(); ++o) {
      const double iou = rotated_rect_iou(predicted[p], *observed[o]);
      if (iou > 0) pairs.push_back({iou, p, o});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.obs != b.obs) return a.obs < b.obs;
    return a.pred < b.pred;
  });
  std::vector<bool> pred_used(predicted.size()), obs_used(observed.size());
  double sum = 0.0;
  for (const auto& pr : pairs) {
    if (pred_used[pr.pred] || obs_used[pr.obs]) continue;
    pred_used[pr.pred] = obs_used[pr.obs] = true;
    sum += pr.iou;
  }
  *total += sum;
  return sum;
}

}  // namespace

double estimate_time_shift(const Clip& uav_clip,
                           const std::vector<CameraObservationStream>& obs,
                           const SceneConfig& scene, const SyncConfig& cfg) {
  cfg.validate();
  bool any_obs = false;
  for (const auto& stream : obs) any_obs |= !stream.observations.empty();
  if (!any_obs || uav_clip.samples.empty())
    throw ValidationError("estimate_time_shift", "empty observations or clip");

  std::map<long, const Sample*> samples_by_tick;  // tick = round(t / step_quantum)
  constexpr double kTick = 1e-6;
  for (const auto& s : uav_clip.samples)
    samples_by_tick[std::lround(s.timestamp / kTick)] = &s;

  std::map<std::string, const CameraModel*> cams;
  for (const auto& c : scene.cameras) cams[c.id] = &c;

  double best_score = -1.0, best_shift = 0.0;
  bool found = false;
  const long steps =
      std::lround((cfg.shift_range[1] - cfg.shift_range[0]) / cfg.shift_step);
  for (long k = 0; k <= steps; ++k) {
    const double shift = cfg.shift_range[0] + k * cfg.shift_step;
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& stream : obs) {
      const auto cam_it = cams.find(stream.camera_id);
      if (cam_it == cams.end())
        throw ValidationError("estimate_time_shift.camera",
                              "unknown camera '" + stream.camera_id + "'");
      // group observations by timestamp
      std::map<long, std::vector<const RotatedRect2D*>> by_time;
      for (const auto& o : stream.observations)
        by_time[std::lround(o.timestamp / kTick)].push_back(&o.rect);
      for (const auto& [tick, rects] : by_time) {
        const long uav_tick = tick - std::lround(shift / kTick);
        const auto it = samples_by_tick.find(uav_tick);
        if (it == samples_by_tick.end()) continue;
        std::vector<RotatedRect2D> predicted;
        for (const auto& box : it->second->boxes)
          if (auto r = projected_bounding_rect(*cam_it->second, box))
            predicted.push_back(*r);
        greedy_iou_score(predicted, rects, &sum);
        count += rects.size();
      }
    }
    if (count == 0) continue;
    const double score = sum / static_cast<double>(count);
    const bool better =
        !found || score > best_score ||
        (score == best_score && std::abs(shift) < std::abs(best_shift));
    if (better) {
      best_score = score;
      best_shift = shift;
      found = true;
    }
  }
  if (!found)
    throw ValidationError("estimate_time_shift",
                          "no temporal overlap at any candidate shift");
  return best_shift;
}

}  // namespace bev3d
