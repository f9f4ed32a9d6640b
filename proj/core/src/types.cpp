#include "bev3d/types.hpp"

#include <cmath>

namespace bev3d {

namespace {

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ValidationError(field, msg);
}

void check_range(const Vec2& r, const std::string& path) {
  require(r[0] < r[1], path, "range must satisfy lo < hi");
}

}  // namespace

std::string to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::Car: return "car";
    case VehicleClass::Van: return "van";
    case VehicleClass::Bus: return "bus";
    case VehicleClass::Truck: return "truck";
  }
  return "car";
}

VehicleClass parse_vehicle_class(const std::string& name) {
  if (name == "car") return VehicleClass::Car;
  if (name == "van") return VehicleClass::Van;
  if (name == "bus") return VehicleClass::Bus;
  if (name == "truck") return VehicleClass::Truck;
  throw ValidationError("class", "unknown vehicle class '" + name + "'");
}

double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

void PerceptionCuboid::validate(const std::string& path) const {
  check_range(x_range, path + ".x");
  check_range(y_range, path + ".y");
  check_range(z_range, path + ".z");
}

void CameraModel::validate(const std::string& path) const {
  require(width > 0 && height > 0, path + ".size", "width/height must be > 0");
  require(fx > 0 && fy > 0, path + ".focal", "fx and fy must be > 0");
  require(cx > 0 && cx < width, path + ".cx", "principal point outside image");
  require(cy > 0 && cy < height, path + ".cy", "principal point outside image");
  const double ortho =
      (rotation.transpose() * rotation - Mat3::Identity()).norm();
  require(ortho < 1e-9, path + ".rotation", "matrix is not orthonormal");
  require(std::abs(rotation.determinant() - 1.0) < 1e-9, path + ".rotation",
          "determinant must be +1 (reflections forbidden)");
}

void Box3D::validate(const std::string& path) const {
  require(size.x() > 0 && size.y() > 0 && size.z() > 0, path + ".size",
          "dimensions must be > 0");
  require(yaw > -M_PI - 1e-12 && yaw <= M_PI + 1e-12, path + ".yaw",
          "yaw must be normalized to (-pi, pi]");
}

std::array<Vec2, 4> RotatedRect2D::corners() const {
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec2 u(c, s), v(-s, c);  // length axis, width axis
  const Vec2 hl = 0.5 * length * u, hw = 0.5 * width * v;
  return {center + hl + hw, center - hl + hw, center - hl - hw,
          center + hl - hw};
}

void RotatedRect2D::validate(const std::string& path) const {
  require(length > 0 && width > 0, path + ".size",
          "length and width must be > 0");
}

void Detection::validate(const std::string& path) const {
  box.validate(path + ".box");
  require(score >= 0.0 && score <= 1.0, path + ".score",
          "score must be in [0,1]");
}

void Clip::validate(const std::string& path) const {
  require(rate_hz > 0, path + ".rate", "rate must be > 0");
  const double dt = 1.0 / rate_hz;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string sp = path + ".samples[" + std::to_string(i) + "]";
    if (i > 0) {
      const double gap = samples[i].timestamp - samples[i - 1].timestamp;
      require(std::abs(gap - dt) < 1e-6, sp + ".timestamp",
              "samples must be equally spaced at 1/rate");
    }
    for (std::size_t b = 0; b < samples[i].boxes.size(); ++b)
      samples[i].boxes[b].validate(sp + ".boxes[" + std::to_string(b) + "]");
  }
}

void Trajectory::validate(const std::string& path) const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].timestamp <= points[i - 1].timestamp)
      throw ValidationError(path + ".points[" + std::to_string(i) + "]",
                            "timestamps must be strictly increasing");
}

double Terrain::altitude(const Vec2& xy) const {
  const double gx = (xy.x() - origin.x()) / cell_size;
  const double gy = (xy.y() - origin.y()) / cell_size;
  if (gx < 0 || gy < 0 || gx > cols() - 1 || gy > rows() - 1)
    throw ValidationError("terrain.query",
                          "point outside terrain grid extent");
  const int c0 = std::min(static_cast<int>(gx), cols() - 2 >= 0 ? cols() - 2 : 0);
  const int r0 = std::min(static_cast<int>(gy), rows() - 2 >= 0 ? rows() - 2 : 0);
  const int c1 = std::min(c0 + 1, cols() - 1);
  const int r1 = std::min(r0 + 1, rows() - 1);
  const double tx = gx - c0, ty = gy - r0;
  const double a00 = grid[r0][c0], a01 = grid[r0][c1];
  const double a10 = grid[r1][c0], a11 = grid[r1][c1];
  return a00 * (1 - tx) * (1 - ty) + a01 * tx * (1 - ty) +
         a10 * (1 - tx) * ty + a11 * tx * ty;
}

void Terrain::validate(const std::string& path) const {
  require(cell_size > 0, path + ".cell_size", "cell_size must be > 0");
  require(!grid.empty() && !grid[0].empty(), path + ".grid",
          "grid must be non-empty");
  for (std::size_t r = 1; r < grid.size(); ++r)
    require(grid[r].size() == grid[0].size(),
            path + ".grid[" + std::to_string(r) + "]",
            "grid rows must have equal length");
}

double ClassHeightTable::at(VehicleClass c) const {
  const auto it = heights.find(c);
  if (it == heights.end())
    throw ValidationError("class_heights." + to_string(c),
                          "missing class height");
  return it->second;
}

void ClassHeightTable::validate(const std::string& path) const {
  for (VehicleClass c : kAllClasses) {
    const auto it = heights.find(c);
    require(it != heights.end(), path + "." + to_string(c),
            "all four classes must be present");
    require(it->second > 0, path + "." + to_string(c),
            "height must be > 0");
  }
}

void SceneConfig::validate(const std::string& path) const {
  cuboid.validate(path + ".cuboid");
  for (std::size_t i = 0; i < cameras.size(); ++i)
    cameras[i].validate(path + ".cameras[" + std::to_string(i) + "]");
  terrain.validate(path + ".terrain");
  class_heights.validate(path + ".class_heights");
}

}  // namespace bev3d
