#pragma once

#include "bev3d/calib.hpp"
#include "bev3d/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace bev3d {

// scene.json
SceneConfig load_scene(const std::string& path);
void save_scene(const SceneConfig& scene, const std::string& path);

/// One line of annotations.jsonl / detections.jsonl, keyed by clip + sample.
struct AnnotationRecord {
  std::string clip;
  int sample = 0;
  double timestamp = 0.0;
  Box3D box;
  std::optional<double> score;  // present for detections
};

// JSONL, one record per box. Values round-trip at full double precision.
std::vector<AnnotationRecord> load_annotation_records(const std::string& path);
void save_annotation_records(const std::vector<AnnotationRecord>& records,
                             const std::string& path);

// Groups records into clips ordered by sample index; timestamps must step
// at 1/rate. Records may arrive unsorted.
std::vector<Clip> records_to_clips(std::vector<AnnotationRecord> records,
                                   double rate_hz = 2.0);
std::vector<AnnotationRecord> clips_to_records(const std::vector<Clip>& clips);

std::vector<Clip> load_annotations(const std::string& path,
                                   double rate_hz = 2.0);
void save_annotations(const std::vector<Clip>& clips, const std::string& path);

/// UAV-plane JSONL record: a tracked rotated box in UAV pixels.
struct UavRecord {
  std::string clip;
  int sample = 0;
  double timestamp = 0.0;
  std::int64_t track = 0;
  VehicleClass cls = VehicleClass::Car;
  RotatedRect2D rect;  // frame = UavPixels
};

std::vector<UavRecord> load_uav_records(const std::string& path);
void save_uav_records(const std::vector<UavRecord>& records,
                      const std::string& path);

// Correspondence file: JSON list of {world:[3],pixel:[2]} or
// {source:[2],target:[2]} objects (homogeneous lists only).
using CorrespondenceSet = std::variant<std::vector<Correspondence2D3D>,
                                       std::vector<CorrespondencePair2D>>;
CorrespondenceSet load_correspondences(const std::string& path);

}  // namespace bev3d
