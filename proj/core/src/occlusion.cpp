#include "bev3d/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bev3d {

namespace {

double box_camera_distance(const Box3D& box, const CameraModel& camera,
                           OcclusionDistance mode) {
  if (mode == OcclusionDistance::CenterToCamera)
    return (box.center - camera.translation).norm();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : box3d_corners(box))
    best = std::min(best, (c - camera.translation).norm());
  return best;
}

}  // namespace

double monocular_occlusion(const SceneConfig& scene, const Sample& sample,
                           const CameraModel& camera, int box_index,
                           const OcclusionOptions& options) {
  (void)scene;
  const auto& boxes = sample.boxes;
  if (box_index < 0 || box_index >= static_cast<int>(boxes.size()))
    throw ValidationError("monocular_occlusion.box_index", "out of range");
  const Box3D& target = boxes[box_index];
  const auto target_poly =
      box3d_image_polygon(camera, target, options.clip_to_image);
  if (!target_poly) return 1.0;  // does not appear: totally occluded
  const double target_area = polygon_area(*target_poly);
  if (target_area <= 1e-12) return 1.0;

  const double target_dist =
      box_camera_distance(target, camera, options.distance);
  std::vector<Polygon2D> covered;
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    if (static_cast<int>(j) == box_index) continue;
    // strictly nearer boxes only; equal distances stay out of the set
    if (box_camera_distance(boxes[j], camera, options.distance) >=
        target_dist)
      continue;
    const auto poly = box3d_image_polygon(camera, boxes[j], options.clip_to_image);
    if (!poly) continue;
    if (auto inter = convex_intersect(*poly, *target_poly))
      covered.push_back(std::move(*inter));
  }
  if (covered.empty()) return 0.0;
  double occ = union_area(covered) / target_area;
  if (occ < 1e-9) occ = 0.0;
  return std::clamp(occ, 0.0, 1.0);
}

double multiview_occlusion(const SceneConfig& scene, const Sample& sample,
                           int box_index, const OcclusionOptions& options) {
  if (scene.cameras.empty())
    throw ValidationError("multiview_occlusion", "scene has no cameras");
  double sum = 0.0;
  for (const auto& cam : scene.cameras)
    sum += monocular_occlusion(scene, sample, cam, box_index, options);
  return sum / static_cast<double>(scene.cameras.size());
}

std::vector<BoxOcclusion> sample_occlusions(const SceneConfig& scene,
                                            const Sample& sample,
                                            int sample_index,
                                            const OcclusionOptions& options) {
  std::vector<BoxOcclusion> out;
  out.reserve(sample.boxes.size());
  for (std::size_t b = 0; b < sample.boxes.size(); ++b) {
    BoxOcclusion bo;
    bo.sample_index = sample_index;
    bo.box_index = static_cast<int>(b);
    bo.track = sample.boxes[b].track;
    double sum = 0.0;
    for (const auto& cam : scene.cameras) {
      const double occ = monocular_occlusion(scene, sample, cam,
                                             static_cast<int>(b), options);
      bo.per_camera.push_back(occ);
      sum += occ;
    }
    bo.m_occ = scene.cameras.empty()
                   ? 0.0
                   : sum / static_cast<double>(scene.cameras.size());
    out.push_back(std::move(bo));
  }
  return out;
}

double clip_occlusion(const SceneConfig& scene, const Clip& clip,
                      const OcclusionOptions& options) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < clip.samples.size(); ++s) {
    for (const auto& bo :
         sample_occlusions(scene, clip.samples[s], static_cast<int>(s),
                           options)) {
      sum += bo.m_occ;
      ++count;
    }
  }
  if (count == 0)
    throw ValidationError("clip_occlusion", "clip contains no boxes");
  return sum / static_cast<double>(count);
}

SplitResult split_dataset(
    const std::vector<std::pair<std::string, double>>& clip_occlusions,
    double easy_frac, double hard_frac) {
  if (easy_frac < 0 || easy_frac >= 0.5 || hard_frac < 0 || hard_frac >= 0.5)
    throw ValidationError("split_dataset.fractions",
                          "fractions must lie in [0, 0.5)");
  if (easy_frac + hard_frac >= 1.0)
    throw ValidationError("split_dataset.fractions", "fractions overlap");

  auto sorted = clip_occlusions;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second < b.second;
              return a.first < b.first;
            });
  const std::size_t n = sorted.size();
  const std::size_t n_easy = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * easy_frac));
  const std::size_t n_hard = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * hard_frac));

  SplitResult result;
  result.easy_threshold = std::numeric_limits<double>::quiet_NaN();
  result.hard_threshold = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_easy) {
      result.easy.push_back(sorted[i].first);
      result.easy_threshold = sorted[i].second;
    } else if (i >= n - n_hard) {
      if (result.hard.empty()) result.hard_threshold = sorted[i].second;
      result.hard.push_back(sorted[i].first);
    } else {
      result.train.push_back(sorted[i].first);
    }
  }
  return result;
}

Difficulty occlusion_difficulty(double occ, double threshold) {
  if (occ < 0.0 || occ > 1.0)
    throw ValidationError("occlusion_difficulty.occ", "must be in [0,1]");
  return occ < threshold ? Difficulty::Easy : Difficulty::Hard;
}

}  // namespace bev3d
