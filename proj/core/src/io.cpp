#include "bev3d/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace bev3d {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path, std::string("parse error: ") + e.what());
  }
}

template <int N>
Eigen::Matrix<double, N, 1> parse_vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != N)
    throw ValidationError(path, "expected array of " + std::to_string(N) +
                                    " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_number())
      throw ValidationError(path + "[" + std::to_string(i) + "]",
                            "expected a number");
    v[i] = j[i].get<double>();
  }
  return v;
}

// 9 numbers row-major, or a 4-element quaternion (w, x, y, z).
Mat3 parse_rotation(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected array");
  if (j.size() == 9) {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = j[i].get<double>();
    return r;
  }
  if (j.size() == 4) {
    const Eigen::Quaterniond q(j[0].get<double>(), j[1].get<double>(),
                               j[2].get<double>(), j[3].get<double>());
    if (std::abs(q.norm() - 1.0) > 1e-6)
      throw ValidationError(path, "quaternion is not unit norm");
    return q.normalized().toRotationMatrix();
  }
  throw ValidationError(path, "expected 9 row-major numbers or a quaternion");
}

double get_number(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number())
    throw ValidationError(path + "." + key, "missing or non-numeric field");
  return j[key].get<double>();
}

json box_to_json(const Box3D& b) {
  json j;
  j["class"] = to_string(b.cls);
  j["center"] = {b.center.x(), b.center.y(), b.center.z()};
  j["size"] = {b.size.x(), b.size.y(), b.size.z()};
  j["yaw"] = b.yaw;
  if (b.track) j["track"] = *b.track;
  if (b.interpolated) j["interpolated"] = true;
  return j;
}

Box3D box_from_json(const json& j, const std::string& path) {
  Box3D b;
  if (!j.contains("class") || !j["class"].is_string())
    throw ValidationError(path + ".class", "missing class");
  b.cls = parse_vehicle_class(j["class"].get<std::string>());
  b.center = parse_vec<3>(j.at("center"), path + ".center");
  b.size = parse_vec<3>(j.at("size"), path + ".size");
  b.yaw = normalize_angle(get_number(j, "yaw", path));
  if (j.contains("track")) b.track = j["track"].get<std::int64_t>();
  if (j.contains("interpolated")) b.interpolated = j["interpolated"].get<bool>();
  b.validate(path);
  return b;
}

}  // namespace

SceneConfig load_scene(const std::string& path) {
  const json j = load_json_file(path);
  SceneConfig scene;
  try {
    scene.id = j.value("id", "");
    if (j.contains("cuboid")) {
      const auto& c = j["cuboid"];
      scene.cuboid.x_range = parse_vec<2>(c.at("x"), "cuboid.x");
      scene.cuboid.y_range = parse_vec<2>(c.at("y"), "cuboid.y");
      scene.cuboid.z_range = parse_vec<2>(c.at("z"), "cuboid.z");
    }
    if (!j.contains("cameras") || !j["cameras"].is_array())
      throw ValidationError("cameras", "missing camera list");
    for (std::size_t i = 0; i < j["cameras"].size(); ++i) {
      const auto& cj = j["cameras"][i];
      const std::string cp = "cameras[" + std::to_string(i) + "]";
      CameraModel cam;
      cam.id = cj.value("id", "cam" + std::to_string(i));
      cam.width = static_cast<int>(get_number(cj, "width", cp));
      cam.height = static_cast<int>(get_number(cj, "height", cp));
      cam.fx = get_number(cj, "fx", cp);
      cam.fy = get_number(cj, "fy", cp);
      cam.cx = get_number(cj, "cx", cp);
      cam.cy = get_number(cj, "cy", cp);
      cam.rotation = parse_rotation(cj.at("rotation"), cp + ".rotation");
      cam.translation = parse_vec<3>(cj.at("translation"), cp + ".translation");
      scene.cameras.push_back(std::move(cam));
    }
    if (!j.contains("terrain"))
      throw ValidationError("terrain", "missing terrain");
    const auto& tj = j["terrain"];
    scene.terrain.origin = parse_vec<2>(tj.at("origin"), "terrain.origin");
    scene.terrain.cell_size = get_number(tj, "cell_size", "terrain");
    if (!tj.contains("grid") || !tj["grid"].is_array())
      throw ValidationError("terrain.grid", "missing grid");
    for (const auto& row : tj["grid"]) {
      std::vector<double> r;
      for (const auto& v : row) r.push_back(v.get<double>());
      scene.terrain.grid.push_back(std::move(r));
    }
    if (!j.contains("class_heights"))
      throw ValidationError("class_heights", "missing class_heights");
    for (VehicleClass c : kAllClasses) {
      const std::string name = to_string(c);
      scene.class_heights.heights[c] =
          get_number(j["class_heights"], name.c_str(), "class_heights");
    }
  } catch (const json::exception& e) {
    throw ValidationError("scene", std::string("malformed: ") + e.what());
  }
  scene.validate("scene");
  return scene;
}

void save_scene(const SceneConfig& scene, const std::string& path) {
  json j;
  j["id"] = scene.id;
  j["cuboid"] = {
      {"x", {scene.cuboid.x_range[0], scene.cuboid.x_range[1]}},
      {"y", {scene.cuboid.y_range[0], scene.cuboid.y_range[1]}},
      {"z", {scene.cuboid.z_range[0], scene.cuboid.z_range[1]}}};
  j["cameras"] = json::array();
  for (const auto& cam : scene.cameras) {
    json cj;
    cj["id"] = cam.id;
    cj["width"] = cam.width;
    cj["height"] = cam.height;
    cj["fx"] = cam.fx;
    cj["fy"] = cam.fy;
    cj["cx"] = cam.cx;
    cj["cy"] = cam.cy;
    std::vector<double> rot(9);
    for (int i = 0; i < 9; ++i) rot[i] = cam.rotation(i / 3, i % 3);
    cj["rotation"] = rot;
    cj["translation"] = {cam.translation.x(), cam.translation.y(),
                         cam.translation.z()};
    j["cameras"].push_back(std::move(cj));
  }
  j["terrain"] = {
      {"origin", {scene.terrain.origin.x(), scene.terrain.origin.y()}},
      {"cell_size", scene.terrain.cell_size},
      {"grid", scene.terrain.grid}};
  json heights;
  for (const auto& [c, h] : scene.class_heights.heights)
    heights[to_string(c)] = h;
  j["class_heights"] = heights;

  std::ofstream out(path);
  if (!out) throw ValidationError(path, "cannot open file for writing");
  out << j.dump(2) << "\n";
}

std::vector<AnnotationRecord> load_annotation_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open file");
  std::vector<AnnotationRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string lp = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(lp, std::string("parse error: ") + e.what());
    }
    AnnotationRecord rec;
    rec.clip = j.value("clip", "");
    rec.sample = j.value("sample", 0);
    rec.timestamp = get_number(j, "timestamp", lp);
    rec.box = box_from_json(j, lp);
    if (j.contains("score")) {
      rec.score = j["score"].get<double>();
      Detection d{rec.box, *rec.score};
      d.validate(lp);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_annotation_records(const std::vector<AnnotationRecord>& records,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path, "cannot open file for writing");
  for (const auto& rec : records) {
    json j = box_to_json(rec.box);
    j["clip"] = rec.clip;
    j["sample"] = rec.sample;
    j["timestamp"] = rec.timestamp;
    if (rec.score) j["score"] = *rec.score;
    out << j.dump() << "\n";
  }
}

std::vector<Clip> records_to_clips(std::vector<AnnotationRecord> records,
                                   double rate_hz) {
  std::stable_sort(records.begin(), records.end(),
                   [](const AnnotationRecord& a, const AnnotationRecord& b) {
                     if (a.clip != b.clip) return a.clip < b.clip;
                     return a.sample < b.sample;
                   });
  std::vector<Clip> clips;
  for (const auto& rec : records) {
    if (clips.empty() || clips.back().scene_id != rec.clip) {
      Clip c;
      c.scene_id = rec.clip;
      c.rate_hz = rate_hz;
      clips.push_back(std::move(c));
    }
    Clip& clip = clips.back();
    while (static_cast<int>(clip.samples.size()) <= rec.sample) {
      Sample s;
      s.timestamp = static_cast<double>(clip.samples.size()) / rate_hz;
      clip.samples.push_back(std::move(s));
    }
    Sample& sample = clip.samples[rec.sample];
    if (!sample.boxes.empty() &&
        std::abs(sample.timestamp - rec.timestamp) > 1e-6)
      throw ValidationError("records[clip=" + rec.clip + ",sample=" +
                                std::to_string(rec.sample) + "]",
                            "inconsistent timestamps within a sample");
    sample.timestamp = rec.timestamp;
    sample.boxes.push_back(rec.box);
  }
  for (auto& clip : clips) {
    for (std::size_t i = 1; i < clip.samples.size(); ++i)
      if (clip.samples[i].timestamp <= clip.samples[i - 1].timestamp)
        throw ValidationError("clip[" + clip.scene_id + "].samples[" +
                                  std::to_string(i) + "]",
                              "non-monotone timestamps");
    clip.validate("clip[" + clip.scene_id + "]");
  }
  return clips;
}

std::vector<AnnotationRecord> clips_to_records(const std::vector<Clip>& clips) {
  std::vector<AnnotationRecord> records;
  for (const auto& clip : clips)
    for (std::size_t s = 0; s < clip.samples.size(); ++s)
      for (const auto& box : clip.samples[s].boxes) {
        AnnotationRecord rec;
        rec.clip = clip.scene_id;
        rec.sample = static_cast<int>(s);
        rec.timestamp = clip.samples[s].timestamp;
        rec.box = box;
        records.push_back(std::move(rec));
      }
  return records;
}

std::vector<Clip> load_annotations(const std::string& path, double rate_hz) {
  return records_to_clips(load_annotation_records(path), rate_hz);
}

void save_annotations(const std::vector<Clip>& clips, const std::string& path) {
  save_annotation_records(clips_to_records(clips), path);
}

std::vector<UavRecord> load_uav_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open file");
  std::vector<UavRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string lp = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(lp, std::string("parse error: ") + e.what());
    }
    UavRecord rec;
    rec.clip = j.value("clip", "");
    rec.sample = j.value("sample", 0);
    rec.timestamp = get_number(j, "timestamp", lp);
    rec.track = j.value("track", 0);
    rec.cls = parse_vehicle_class(j.value("class", ""));
    rec.rect.frame = RectFrame::UavPixels;
    rec.rect.center = parse_vec<2>(j.at("center"), lp + ".center");
    rec.rect.length = get_number(j, "length", lp);
    rec.rect.width = get_number(j, "width", lp);
    rec.rect.angle = get_number(j, "angle", lp);
    rec.rect.validate(lp);
    records.push_back(std::move(rec));
  }
  return records;
}

void save_uav_records(const std::vector<UavRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path, "cannot open file for writing");
  for (const auto& rec : records) {
    json j;
    j["clip"] = rec.clip;
    j["sample"] = rec.sample;
    j["timestamp"] = rec.timestamp;
    j["track"] = rec.track;
    j["class"] = to_string(rec.cls);
    j["center"] = {rec.rect.center.x(), rec.rect.center.y()};
    j["length"] = rec.rect.length;
    j["width"] = rec.rect.width;
    j["angle"] = rec.rect.angle;
    out << j.dump() << "\n";
  }
}

CorrespondenceSet load_correspondences(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.is_array() || j.empty())
    throw ValidationError(path, "expected a non-empty JSON list");
  if (j[0].contains("world")) {
    std::vector<Correspondence2D3D> corr;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string p = path + "[" + std::to_string(i) + "]";
      if (!j[i].contains("world"))
        throw ValidationError(p, "mixed correspondence kinds");
      corr.push_back({parse_vec<3>(j[i].at("world"), p + ".world"),
                      parse_vec<2>(j[i].at("pixel"), p + ".pixel")});
    }
    return corr;
  }
  std::vector<CorrespondencePair2D> pairs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].contains("source"))
      throw ValidationError(p, "expected world/pixel or source/target pairs");
    pairs.push_back({parse_vec<2>(j[i].at("source"), p + ".source"),
                     parse_vec<2>(j[i].at("target"), p + ".target")});
  }
  return pairs;
}

}  // namespace bev3d
