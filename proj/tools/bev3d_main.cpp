// bev3d command-line frontend. Every subcommand is a pure function of its
// inputs, flags and seed; exit codes: 0 success, 1 usage, 2 data error.
#include "bev3d/calib.hpp"
#include "bev3d/eval.hpp"
#include "bev3d/io.hpp"
#include "bev3d/occlusion.hpp"
#include "bev3d/pipeline.hpp"
#include "bev3d/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using json = nlohmann::json;
using namespace bev3d;

namespace {

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path, "cannot open file for writing");
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path, std::string("parse error: ") + e.what());
  }
}

json homography_to_json(const Homography& h) {
  json m = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.push_back(h.m(r, c));
  return json{{"matrix", m}};
}

Homography homography_from_file(const std::string& path) {
  const json j = read_json(path);
  const json& m = j.is_object() ? j.at("matrix") : j;
  if (!m.is_array() || m.size() != 9)
    throw ValidationError(path, "expected 9 row-major matrix entries");
  Mat3 mat;
  for (int k = 0; k < 9; ++k) mat(k / 3, k % 3) = m[k].get<double>();
  return Homography::from_matrix(mat);
}

TerrainMode parse_terrain(const std::string& name) {
  if (name == "flat") return TerrainMode::Flat;
  if (name == "slope") return TerrainMode::PlanarSlope;
  if (name == "sine") return TerrainMode::Sinusoidal;
  throw ValidationError("terrain", "unknown terrain mode '" + name + "'");
}

struct SynthArgs {
  SynthConfig cfg;
  std::string out_dir;
  std::string terrain = "flat";
  int clips = 1;
  bool show_config = false;
};

void run_synth(const SynthArgs& args) {
  SynthConfig cfg = args.cfg;
  cfg.terrain = parse_terrain(args.terrain);
  cfg.validate();
  if (args.clips < 1)
    throw ValidationError("synth.clips", "need at least one clip");

  if (args.show_config) {
    json j{{"seed", cfg.seed},
           {"poles", cfg.pole_count},
           {"cameras_per_pole", cfg.cameras_per_pole},
           {"camera_height", cfg.camera_height},
           {"lanes", cfg.lane_count},
           {"vehicles", {cfg.vehicle_count_range.first,
                         cfg.vehicle_count_range.second}},
           {"speed", {cfg.speed_range[0], cfg.speed_range[1]}},
           {"clip_length", cfg.clip_length},
           {"rate", cfg.rate_hz},
           {"terrain", args.terrain},
           {"congestion", cfg.congestion},
           {"time_shift", cfg.injected_time_shift},
           {"clips", args.clips}};
    std::cout << j.dump(2) << "\n";
    return;
  }

  const auto scene = generate_scene(cfg);
  save_scene(scene, args.out_dir + "/scene.json");

  std::vector<AnnotationRecord> gt_records;
  std::vector<UavRecord> uav_records;
  std::ofstream obs(args.out_dir + "/observations.jsonl");
  if (!obs)
    throw ValidationError(args.out_dir + "/observations.jsonl",
                          "cannot open file for writing");

  Homography uav_to_world;
  for (int k = 0; k < args.clips; ++k) {
    SynthConfig clip_cfg = cfg;
    clip_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k);
    auto clip = generate_clip(scene, clip_cfg);
    uav_to_world = clip.uav_to_world;
    const std::string clip_id =
        args.clips == 1 ? scene.id
                        : scene.id + "-clip" + std::to_string(k);
    clip.gt.scene_id = clip_id;
    for (const auto& rec : clips_to_records({clip.gt}))
      gt_records.push_back(rec);
    for (std::size_t s = 0; s < clip.uav.size(); ++s)
      for (const auto& ub : clip.uav[s]) {
        UavRecord rec;
        rec.clip = clip_id;
        rec.sample = static_cast<int>(s);
        rec.timestamp = clip.gt.samples[s].timestamp;
        rec.track = ub.track;
        rec.cls = ub.cls;
        rec.rect = ub.rect;
        uav_records.push_back(std::move(rec));
      }
    for (const auto& stream : clip.observations)
      for (const auto& o : stream.observations) {
        json j{{"clip", clip_id},
               {"camera", stream.camera_id},
               {"timestamp", o.timestamp},
               {"center", {o.rect.center.x(), o.rect.center.y()}},
               {"length", o.rect.length},
               {"width", o.rect.width},
               {"angle", o.rect.angle}};
        obs << j.dump() << "\n";
      }
  }
  save_annotation_records(gt_records, args.out_dir + "/annotations.jsonl");
  save_uav_records(uav_records, args.out_dir + "/uav.jsonl");
  write_json(homography_to_json(uav_to_world),
             args.out_dir + "/uav_to_world.json");
}

void run_lift(const std::string& scene_path, const std::string& in_path,
              const std::string& homography_path,
              const std::string& out_path) {
  const auto scene = load_scene(scene_path);
  const auto h = homography_from_file(homography_path);
  const auto uav = load_uav_records(in_path);

  std::vector<AnnotationRecord> out;
  out.reserve(uav.size());
  for (const auto& rec : uav) {
    const auto world_rect = bev_rect_to_world(h, rec.rect);
    AnnotationRecord ar;
    ar.clip = rec.clip;
    ar.sample = rec.sample;
    ar.timestamp = rec.timestamp;
    ar.box = lift_to_3d(world_rect, scene.terrain, scene.class_heights,
                        rec.cls);
    ar.box.track = rec.track;
    out.push_back(std::move(ar));
  }
  save_annotation_records(out, out_path);
}

void run_project(const std::string& scene_path, const std::string& in_path,
                 const std::string& out_path, double rate_hz) {
  const auto scene = load_scene(scene_path);
  const auto clips = load_annotations(in_path, rate_hz);
  std::ofstream out(out_path);
  if (!out) throw ValidationError(out_path, "cannot open file for writing");
  for (const auto& clip : clips) {
    for (std::size_t s = 0; s < clip.samples.size(); ++s) {
      const auto projections = project_annotations(scene, clip.samples[s]);
      for (const auto& cp : projections) {
        for (const auto& bp : cp.boxes) {
          if (!bp.polygon) continue;
          json verts = json::array();
          for (const auto& v : bp.polygon->vertices)
            verts.push_back({v.x(), v.y()});
          json j{{"clip", clip.scene_id},
                 {"sample", s},
                 {"camera", cp.camera_id},
                 {"box", bp.box_index},
                 {"partial", bp.polygon->partial},
                 {"polygon", verts}};
          const auto& box = clip.samples[s].boxes[bp.box_index];
          if (box.track) j["track"] = *box.track;
          out << j.dump() << "\n";
        }
      }
    }
  }
}

void run_occ(const std::string& scene_path, const std::string& in_path,
             const std::string& out_path, const std::string& summary_path,
             bool per_camera, bool nearest_corner, double rate_hz) {
  const auto scene = load_scene(scene_path);
  const auto clips = load_annotations(in_path, rate_hz);
  OcclusionOptions opts;
  if (nearest_corner) opts.distance = OcclusionDistance::NearestCornerToCamera;

  std::ofstream out(out_path);
  if (!out) throw ValidationError(out_path, "cannot open file for writing");
  json clip_summary = json::object();
  double total = 0.0;
  std::size_t total_boxes = 0;
  for (const auto& clip : clips) {
    double clip_sum = 0.0;
    std::size_t clip_boxes = 0;
    for (std::size_t s = 0; s < clip.samples.size(); ++s) {
      for (const auto& bo : sample_occlusions(scene, clip.samples[s],
                                              static_cast<int>(s), opts)) {
        json j{{"clip", clip.scene_id}, {"sample", s}, {"occ", bo.m_occ}};
        if (bo.track) j["track"] = *bo.track;
        out << j.dump() << "\n";
        if (per_camera)
          for (std::size_t c = 0; c < bo.per_camera.size(); ++c) {
            json cj = j;
            cj["camera"] = scene.cameras[c].id;
            cj["occ"] = bo.per_camera[c];
            out << cj.dump() << "\n";
          }
        clip_sum += bo.m_occ;
        ++clip_boxes;
      }
    }
    if (clip_boxes == 0)
      throw ValidationError("occ.clip[" + clip.scene_id + "]",
                            "clip contains no boxes");
    clip_summary[clip.scene_id] = clip_sum / clip_boxes;
    total += clip_sum;
    total_boxes += clip_boxes;
  }
  if (!summary_path.empty())
    write_json(json{{"clips", clip_summary},
                    {"mean", total_boxes ? total / total_boxes : 0.0}},
               summary_path);
}

void run_split(const std::string& in_path, const std::string& out_path,
               double easy_frac, double hard_frac) {
  const json j = read_json(in_path);
  const json& clips = j.is_object() && j.contains("clips") ? j["clips"] : j;
  if (!clips.is_object())
    throw ValidationError(in_path, "expected a clip -> occlusion object");
  std::vector<std::pair<std::string, double>> occs;
  for (const auto& [id, v] : clips.items())
    occs.emplace_back(id, v.get<double>());
  const auto split = split_dataset(occs, easy_frac, hard_frac);
  json result{{"train", split.train},
              {"easy", split.easy},
              {"hard", split.hard},
              {"reference_thresholds", {{"easy", 0.23}, {"hard", 0.48}}}};
  if (!split.easy.empty()) result["easy_threshold"] = split.easy_threshold;
  if (!split.hard.empty()) result["hard_threshold"] = split.hard_threshold;
  write_json(result, out_path);
}

std::vector<DetectionClip> load_detections(const std::string& path,
                                           double rate_hz) {
  const auto records = load_annotation_records(path);
  // reuse the clip grouping, carrying scores alongside
  std::map<std::string, DetectionClip> by_clip;
  for (const auto& rec : records) {
    if (!rec.score)
      throw ValidationError(path, "detection record without a score");
    auto& dc = by_clip[rec.clip];
    dc.clip_id = rec.clip;
    while (static_cast<int>(dc.samples.size()) <= rec.sample) {
      DetectionSample ds;
      ds.timestamp = static_cast<double>(dc.samples.size()) / rate_hz;
      dc.samples.push_back(std::move(ds));
    }
    dc.samples[rec.sample].timestamp = rec.timestamp;
    dc.samples[rec.sample].detections.push_back({rec.box, *rec.score});
  }
  std::vector<DetectionClip> out;
  out.reserve(by_clip.size());
  for (auto& [id, dc] : by_clip) out.push_back(std::move(dc));
  return out;
}

json tp_errors_to_json(const TpErrors& e) {
  return json{{"ate", e.ate},
              {"ase", e.ase},
              {"aoe", e.aoe},
              {"ave", e.ave},
              {"aae", e.aae}};
}

void run_eval(const std::string& gt_path, const std::string& in_path,
              const std::string& out_path, double rate_hz) {
  const auto gt = load_annotations(gt_path, rate_hz);
  const auto dets = load_detections(in_path, rate_hz);
  const auto r = evaluate(gt, dets);
  json per_class = json::object();
  for (const auto& [cls, cr] : r.per_class) {
    json ap = json::object();
    for (const auto& [t, v] : cr.ap) ap[std::to_string(t)] = v;
    per_class[to_string(cls)] = {{"ap", ap},
                                 {"errors", tp_errors_to_json(cr.errors)},
                                 {"num_gt", cr.num_gt}};
  }
  json missing = json::array();
  for (VehicleClass c : r.classes_without_gt) missing.push_back(to_string(c));
  const json result{{"nds", r.nds},
                    {"map", r.map},
                    {"mate", r.mate},
                    {"mase", r.mase},
                    {"maoe", r.maoe},
                    {"mave", r.mave},
                    {"maae", r.maae},
                    {"per_class", per_class},
                    {"classes_without_gt", missing}};
  if (out_path.empty())
    std::cout << result.dump(2) << "\n";
  else
    write_json(result, out_path);
}

void run_eval_mono(const std::string& gt_path, const std::string& in_path,
                   const std::string& out_path, double iou, double rate_hz) {
  const auto gt = load_annotations(gt_path, rate_hz);
  const auto dets = load_detections(in_path, rate_hz);
  std::map<std::string, const DetectionClip*> det_by_id;
  for (const auto& dc : dets) det_by_id[dc.clip_id] = &dc;

  // one frame per (clip, sample), all classes pooled
  std::vector<EvalFrame> frames;
  for (const auto& clip : gt) {
    const DetectionClip* dc = nullptr;
    if (auto it = det_by_id.find(clip.scene_id); it != det_by_id.end())
      dc = it->second;
    for (std::size_t s = 0; s < clip.samples.size(); ++s) {
      EvalFrame f;
      f.gts = clip.samples[s].boxes;
      if (dc && s < dc->samples.size()) f.dets = dc->samples[s].detections;
      if (!f.gts.empty() || !f.dets.empty()) frames.push_back(std::move(f));
    }
  }
  const json result{{"ap40", ap40(frames, iou)}, {"iou_threshold", iou}};
  if (out_path.empty())
    std::cout << result.dump(2) << "\n";
  else
    write_json(result, out_path);
}

void run_track_refine(const std::string& in_path, const std::string& out_path,
                      double min_duration, double rate_hz) {
  const auto clips = load_annotations(in_path, rate_hz);
  std::vector<AnnotationRecord> out;
  for (const auto& clip : clips) {
    // rebuild per-track trajectories
    std::map<std::int64_t, Trajectory> tracks;
    for (const auto& s : clip.samples)
      for (const auto& b : s.boxes) {
        if (!b.track)
          throw ValidationError("track_refine",
                                "annotation without a track id");
        auto& t = tracks[*b.track];
        t.track = *b.track;
        t.cls = b.cls;
        TrajectoryPoint p;
        p.timestamp = s.timestamp;
        p.box = b;
        t.points.push_back(std::move(p));
      }
    std::vector<Trajectory> trajs;
    trajs.reserve(tracks.size());
    for (auto& [id, t] : tracks) trajs.push_back(std::move(t));
    trajs = prune_trajectories(std::move(trajs), min_duration);
    const double t0 = clip.samples.empty() ? 0.0 : clip.samples[0].timestamp;
    for (const auto& traj : trajs) {
      const auto filled = interpolate_gaps(traj, rate_hz);
      for (const auto& p : filled.points) {
        AnnotationRecord rec;
        rec.clip = clip.scene_id;
        rec.sample =
            static_cast<int>(std::lround((p.timestamp - t0) * rate_hz));
        rec.timestamp = p.timestamp;
        rec.box = p.box;
        out.push_back(std::move(rec));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AnnotationRecord& a, const AnnotationRecord& b) {
                     if (a.clip != b.clip) return a.clip < b.clip;
                     if (a.sample != b.sample) return a.sample < b.sample;
                     return a.box.track < b.box.track;
                   });
  save_annotation_records(out, out_path);
}

void run_sync(const std::string& scene_path, const std::string& uav_path,
              const std::string& in_path, const std::string& out_path,
              double range, double step, double rate_hz) {
  const auto scene = load_scene(scene_path);
  const auto clips = load_annotations(uav_path, rate_hz);
  if (clips.size() != 1)
    throw ValidationError("sync", "expected exactly one clip of annotations");

  std::map<std::string, CameraObservationStream> streams;
  std::ifstream in(in_path);
  if (!in) throw ValidationError(in_path, "cannot open file");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(in_path + ":" + std::to_string(line_no),
                            std::string("parse error: ") + e.what());
    }
    const std::string cam = j.value("camera", "");
    auto& stream = streams[cam];
    stream.camera_id = cam;
    CameraObservation obs;
    obs.timestamp = j.at("timestamp").get<double>();
    obs.rect.frame = RectFrame::ImagePixels;
    obs.rect.center = Vec2(j.at("center")[0].get<double>(),
                           j.at("center")[1].get<double>());
    obs.rect.length = j.at("length").get<double>();
    obs.rect.width = j.at("width").get<double>();
    obs.rect.angle = j.value("angle", 0.0);
    stream.observations.push_back(std::move(obs));
  }
  std::vector<CameraObservationStream> obs;
  obs.reserve(streams.size());
  for (auto& [id, s] : streams) obs.push_back(std::move(s));

  SyncConfig cfg;
  cfg.shift_range = Vec2(-range, range);
  cfg.shift_step = step;
  const double shift = estimate_time_shift(clips[0], obs, scene, cfg);
  const json result{{"shift_seconds", shift}};
  if (out_path.empty())
    std::cout << result.dump(2) << "\n";
  else
    write_json(result, out_path);
}

void run_calib(const std::string& in_path, const std::string& scene_path,
               const std::string& camera_id, const std::string& out_path,
               bool refine_focal) {
  const auto corr = load_correspondences(in_path);
  json result;
  if (std::holds_alternative<std::vector<CorrespondencePair2D>>(corr)) {
    const auto& pairs = std::get<std::vector<CorrespondencePair2D>>(corr);
    const auto h = estimate_homography(pairs);
    result = homography_to_json(h);
    double max_err = 0.0;
    for (const auto& p : pairs)
      max_err =
          std::max(max_err, (apply_homography(h, p.source) - p.target).norm());
    result["max_transfer_error"] = max_err;
  } else {
    if (scene_path.empty())
      throw ValidationError("calib",
                            "pose refinement needs --scene for the init camera");
    const auto scene = load_scene(scene_path);
    const CameraModel* init = nullptr;
    for (const auto& c : scene.cameras)
      if (camera_id.empty() || c.id == camera_id) {
        init = &c;
        break;
      }
    if (!init)
      throw ValidationError("calib.camera",
                            "camera '" + camera_id + "' not in scene");
    RefineOptions opts;
    opts.refine_focal = refine_focal;
    const auto r = refine_pose(
        *init, std::get<std::vector<Correspondence2D3D>>(corr), opts);
    json rot = json::array();
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) rot.push_back(r.camera.rotation(row, col));
    result = json{{"camera", r.camera.id},
                  {"rotation", rot},
                  {"translation",
                   {r.camera.translation.x(), r.camera.translation.y(),
                    r.camera.translation.z()}},
                  {"fx", r.camera.fx},
                  {"fy", r.camera.fy},
                  {"rmse_px", r.rmse},
                  {"iterations", r.iterations},
                  {"converged", r.converged}};
  }
  if (out_path.empty())
    std::cout << result.dump(2) << "\n";
  else
    write_json(result, out_path);
}

void run_perturb(const std::string& scene_path, const std::string& out_path,
                 int drop, const PerturbParams& params) {
  auto scene = load_scene(scene_path);
  if (drop > 0) {
    scene = drop_cameras(scene, drop, params.seed);
  } else {
    scene.cameras = perturb_cameras(scene.cameras, params);
  }
  save_scene(scene, out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roadside multi-view 3D annotation and evaluation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");
  int jobs = 0;
  app.add_option("--jobs", jobs, "worker threads (results are independent)");

  // synth
  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic scene");
  cmd_synth->add_option("--out", synth.out_dir, "output directory")
      ->required();
  cmd_synth->add_option("--seed", synth.cfg.seed, "RNG seed");
  cmd_synth->add_option("--clips", synth.clips, "number of clips");
  cmd_synth->add_option("--poles", synth.cfg.pole_count, "camera poles");
  cmd_synth->add_option("--cameras-per-pole", synth.cfg.cameras_per_pole, "");
  cmd_synth->add_option("--camera-height", synth.cfg.camera_height, "");
  cmd_synth->add_option("--lanes", synth.cfg.lane_count, "");
  cmd_synth->add_option("--vehicles-min", synth.cfg.vehicle_count_range.first,
                        "");
  cmd_synth->add_option("--vehicles-max", synth.cfg.vehicle_count_range.second,
                        "");
  cmd_synth->add_option("--clip-length", synth.cfg.clip_length, "");
  cmd_synth->add_option("--rate", synth.cfg.rate_hz, "");
  cmd_synth->add_option("--terrain", synth.terrain, "flat|slope|sine");
  cmd_synth->add_option("--congestion", synth.cfg.congestion, "");
  cmd_synth->add_option("--time-shift", synth.cfg.injected_time_shift,
                        "camera clock offset, seconds");
  cmd_synth->add_flag("--show-config", synth.show_config,
                      "print the effective config and exit");

  // lift
  std::string scene_path, in_path, out_path, homography_path;
  double rate_hz = 2.0;
  auto* cmd_lift =
      app.add_subcommand("lift", "UAV-plane boxes to 3D annotations");
  cmd_lift->add_option("--scene", scene_path, "")->required();
  cmd_lift->add_option("--in", in_path, "")->required();
  cmd_lift->add_option("--homography", homography_path, "")->required();
  cmd_lift->add_option("--out", out_path, "")->required();

  // project
  auto* cmd_project =
      app.add_subcommand("project", "3D annotations to per-camera polygons");
  cmd_project->add_option("--scene", scene_path, "")->required();
  cmd_project->add_option("--in", in_path, "")->required();
  cmd_project->add_option("--out", out_path, "")->required();
  cmd_project->add_option("--rate", rate_hz, "");

  // occ
  std::string summary_path;
  bool per_camera = false, nearest_corner = false;
  auto* cmd_occ = app.add_subcommand("occ", "occlusion report");
  cmd_occ->add_option("--scene", scene_path, "")->required();
  cmd_occ->add_option("--in", in_path, "")->required();
  cmd_occ->add_option("--out", out_path, "")->required();
  cmd_occ->add_option("--summary", summary_path, "clip-level summary JSON");
  cmd_occ->add_flag("--per-camera", per_camera, "emit per-camera rows");
  cmd_occ->add_flag("--nearest-corner", nearest_corner,
                    "use nearest-corner distance ordering");
  cmd_occ->add_option("--rate", rate_hz, "");

  // split
  double easy_frac = 0.10, hard_frac = 0.10;
  auto* cmd_split = app.add_subcommand("split", "train/easy/hard split");
  cmd_split->add_option("--in", in_path, "occ summary JSON")->required();
  cmd_split->add_option("--out", out_path, "")->required();
  cmd_split->add_option("--easy-frac", easy_frac, "");
  cmd_split->add_option("--hard-frac", hard_frac, "");

  // eval
  std::string gt_path;
  auto* cmd_eval = app.add_subcommand("eval", "NDS detection evaluation");
  cmd_eval->add_option("--gt", gt_path, "")->required();
  cmd_eval->add_option("--in", in_path, "detections JSONL")->required();
  cmd_eval->add_option("--out", out_path, "defaults to stdout");
  cmd_eval->add_option("--rate", rate_hz, "");

  // eval-mono
  double iou = 0.7;
  auto* cmd_mono = app.add_subcommand("eval-mono", "AP40 evaluation");
  cmd_mono->add_option("--gt", gt_path, "")->required();
  cmd_mono->add_option("--in", in_path, "")->required();
  cmd_mono->add_option("--iou", iou, "3D IoU threshold");
  cmd_mono->add_option("--out", out_path, "defaults to stdout");
  cmd_mono->add_option("--rate", rate_hz, "");

  // track-refine
  double min_duration = 1.0;
  auto* cmd_track =
      app.add_subcommand("track-refine", "prune and interpolate trajectories");
  cmd_track->add_option("--in", in_path, "")->required();
  cmd_track->add_option("--out", out_path, "")->required();
  cmd_track->add_option("--min-duration", min_duration, "seconds");
  cmd_track->add_option("--rate", rate_hz, "");

  // sync
  std::string uav_path;
  double sync_range = 3.0, sync_step = 0.5;
  auto* cmd_sync = app.add_subcommand("sync", "estimate the camera time shift");
  cmd_sync->add_option("--scene", scene_path, "")->required();
  cmd_sync->add_option("--uav", uav_path, "lifted annotations JSONL")
      ->required();
  cmd_sync->add_option("--in", in_path, "camera observations JSONL")
      ->required();
  cmd_sync->add_option("--out", out_path, "defaults to stdout");
  cmd_sync->add_option("--range", sync_range, "search +-range seconds");
  cmd_sync->add_option("--step", sync_step, "grid step seconds");
  cmd_sync->add_option("--rate", rate_hz, "");

  // calib
  std::string camera_id;
  bool refine_focal = false;
  auto* cmd_calib =
      app.add_subcommand("calib", "homography / pose from correspondences");
  cmd_calib->add_option("--in", in_path, "correspondences JSON")->required();
  cmd_calib->add_option("--scene", scene_path, "init camera source");
  cmd_calib->add_option("--camera", camera_id, "camera id in the scene");
  cmd_calib->add_option("--out", out_path, "defaults to stdout");
  cmd_calib->add_flag("--refine-focal", refine_focal, "");

  // perturb
  int drop = 0;
  PerturbParams perturb;
  auto* cmd_perturb =
      app.add_subcommand("perturb", "camera dropping / pose perturbation");
  cmd_perturb->add_option("--scene", scene_path, "")->required();
  cmd_perturb->add_option("--out", out_path, "")->required();
  cmd_perturb->add_option("--seed", perturb.seed, "")->required();
  cmd_perturb->add_option("--drop", drop, "drop k cameras instead");
  cmd_perturb->add_option("--pan-sigma", perturb.pan_sigma_deg, "degrees");
  cmd_perturb->add_option("--tilt-sigma", perturb.tilt_sigma_deg, "degrees");
  cmd_perturb->add_option("--zoom-sigma", perturb.zoom_sigma, "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (cmd_synth->parsed()) run_synth(synth);
    if (cmd_lift->parsed())
      run_lift(scene_path, in_path, homography_path, out_path);
    if (cmd_project->parsed())
      run_project(scene_path, in_path, out_path, rate_hz);
    if (cmd_occ->parsed())
      run_occ(scene_path, in_path, out_path, summary_path, per_camera,
              nearest_corner, rate_hz);
    if (cmd_split->parsed()) run_split(in_path, out_path, easy_frac, hard_frac);
    if (cmd_eval->parsed()) run_eval(gt_path, in_path, out_path, rate_hz);
    if (cmd_mono->parsed())
      run_eval_mono(gt_path, in_path, out_path, iou, rate_hz);
    if (cmd_track->parsed())
      run_track_refine(in_path, out_path, min_duration, rate_hz);
    if (cmd_sync->parsed())
      run_sync(scene_path, uav_path, in_path, out_path, sync_range, sync_step,
               rate_hz);
    if (cmd_calib->parsed())
      run_calib(in_path, scene_path, camera_id, out_path, refine_focal);
    if (cmd_perturb->parsed()) run_perturb(scene_path, out_path, drop, perturb);
  } catch (const ValidationError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"field", e.field()}}
                     .dump()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 2;
  }
  return 0;
}
