#pragma once

#include "bev3d/polygeo.hpp"
#include "bev3d/types.hpp"

#include <string>
#include <vector>

namespace bev3d {

enum class OcclusionDistance { CenterToCamera, NearestCornerToCamera };

struct OcclusionOptions {
  OcclusionDistance distance = OcclusionDistance::CenterToCamera;
  bool clip_to_image = true;
};

// Fraction of box i's projected polygon covered by strictly nearer boxes.
// 1 when the box does not appear in the camera at all.
double monocular_occlusion(const SceneConfig& scene, const Sample& sample,
                           const CameraModel& camera, int box_index,
                           const OcclusionOptions& options = {});

// Mean of the monocular occlusion over every camera of the scene.
double multiview_occlusion(const SceneConfig& scene, const Sample& sample,
                           int box_index, const OcclusionOptions& options = {});

struct BoxOcclusion {
  int sample_index = 0;
  int box_index = 0;
  std::optional<std::int64_t> track;
  std::vector<double> per_camera;  // indexed like scene.cameras
  double m_occ = 0.0;
};

std::vector<BoxOcclusion> sample_occlusions(const SceneConfig& scene,
                                            const Sample& sample,
                                            int sample_index,
                                            const OcclusionOptions& options = {});

// Mean multi-view occlusion over every (sample, box) pair of the clip.
// Throws when the clip contains no boxes at all.
double clip_occlusion(const SceneConfig& scene, const Clip& clip,
                      const OcclusionOptions& options = {});

struct SplitResult {
  std::vector<std::string> train, easy, hard;
  // Realized boundary values of the sorted occlusion ordering; NaN when the
  // corresponding bucket is empty.
  double easy_threshold = 0.0, hard_threshold = 0.0;
};

// Sorts clips by occlusion ascending; the bottom floor(n*easy_frac) become
// the easy split and the top floor(n*hard_frac) the hard split. Ties break
// by clip id.
SplitResult split_dataset(
    const std::vector<std::pair<std::string, double>>& clip_occlusions,
    double easy_frac = 0.10, double hard_frac = 0.10);

enum class Difficulty { Easy, Hard };

// Monocular benchmark rule: easy iff occ < threshold (default 0.8).
Difficulty occlusion_difficulty(double occ, double threshold = 0.8);

}  // namespace bev3d
