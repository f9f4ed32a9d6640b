#include "bev3d/polygeo.hpp"

#include "bev3d/camgeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bev3d {

namespace {

constexpr double kDegenerateEps = 1e-12;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) -
         (a.y() - o.y()) * (b.x() - o.x());
}

// Merged total length of a set of 1D intervals.
double merged_length(std::vector<std::pair<double, double>>& intervals) {
  std::sort(intervals.begin(), intervals.end());
  double total = 0.0, hi = -std::numeric_limits<double>::infinity();
  double lo = hi;
  for (const auto& [a, b] : intervals) {
    if (a > hi) {
      if (hi > lo) total += hi - lo;
      lo = a;
      hi = b;
    } else {
      hi = std::max(hi, b);
    }
  }
  if (hi > lo) total += hi - lo;
  return total;
}

// y-interval of a convex polygon cut by the vertical line x = x0; empty
// optional when the line misses the polygon.
std::optional<std::pair<double, double>> vertical_cut(const Polygon2D& p,
                                                      double x0) {
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  const auto& v = p.vertices;
  const std::size_t n = v.size();
  bool hit = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    if ((a.x() - x0) * (b.x() - x0) > 0) continue;
    double y;
    if (std::abs(b.x() - a.x()) < 1e-300) {
      ylo = std::min({ylo, a.y(), b.y()});
      yhi = std::max({yhi, a.y(), b.y()});
      hit = true;
      continue;
    }
    y = a.y() + (x0 - a.x()) * (b.y() - a.y()) / (b.x() - a.x());
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
    hit = true;
  }
  if (!hit) return std::nullopt;
  return std::make_pair(ylo, yhi);
}

// Intersection x of two segments when they properly cross; used only to
// place slab boundaries, so endpoint touches may be skipped.
std::optional<double> segment_cross_x(const Vec2& p1, const Vec2& p2,
                                      const Vec2& q1, const Vec2& q2) {
  const Vec2 r = p2 - p1, s = q2 - q1;
  const double denom = r.x() * s.y() - r.y() * s.x();
  if (std::abs(denom) < 1e-300) return std::nullopt;
  const Vec2 qp = q1 - p1;
  const double t = (qp.x() * s.y() - qp.y() * s.x()) / denom;
  const double u = (qp.x() * r.y() - qp.y() * r.x()) / denom;
  if (t < 0 || t > 1 || u < 0 || u > 1) return std::nullopt;
  return p1.x() + t * r.x();
}

}  // namespace

double signed_area(const std::vector<Vec2>& vertices) {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = vertices[i];
    const Vec2& q = vertices[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double polygon_area(const Polygon2D& p) { return signed_area(p.vertices); }

Polygon2D convex_hull(const std::vector<Vec2>& points) {
  if (points.size() < 3)
    throw ValidationError("convex_hull", "need at least 3 points");
  std::vector<Vec2> pts = points;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) throw ValidationError("convex_hull", "points are degenerate");

  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3)
    throw ValidationError("convex_hull", "all points are collinear");
  return Polygon2D{hull};
}

bool is_convex(const Polygon2D& p) {
  const auto& v = p.vertices;
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) < -kDegenerateEps)
      return false;
  }
  return signed_area(v) > 0;
}

std::optional<Polygon2D> convex_intersect(const Polygon2D& a,
                                          const Polygon2D& b) {
  if (!is_convex(a) || !is_convex(b))
    throw ValidationError("convex_intersect", "inputs must be convex CCW");
  std::vector<Vec2> out = a.vertices;
  const auto& clip = b.vertices;
  const std::size_t m = clip.size();
  for (std::size_t i = 0; i < m && !out.empty(); ++i) {
    const Vec2& c1 = clip[i];
    const Vec2& c2 = clip[(i + 1) % m];
    std::vector<Vec2> in;
    in.swap(out);
    const std::size_t n = in.size();
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2& p = in[j];
      const Vec2& q = in[(j + 1) % n];
      const double dp = cross(c1, c2, p);
      const double dq = cross(c1, c2, q);
      if (dp >= 0) out.push_back(p);
      if ((dp > 0 && dq < 0) || (dp < 0 && dq > 0)) {
        const double t = dp / (dp - dq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  if (out.size() < 3) return std::nullopt;
  Polygon2D result{out};
  result.partial = a.partial || b.partial;
  if (polygon_area(result) < kDegenerateEps) return std::nullopt;
  return result;
}

double union_area(const std::vector<Polygon2D>& polys) {
  if (polys.empty()) return 0.0;
  // Slab boundaries: every vertex x plus every pairwise edge-crossing x.
  // Within a slab the union length is linear in x, so the midpoint cut
  // integrates exactly.
  std::vector<double> xs;
  std::vector<std::pair<Vec2, Vec2>> edges;
  for (const auto& p : polys) {
    const std::size_t n = p.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(p.vertices[i].x());
      edges.emplace_back(p.vertices[i], p.vertices[(i + 1) % n]);
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j)
      if (auto x = segment_cross_x(edges[i].first, edges[i].second,
                                   edges[j].first, edges[j].second))
        xs.push_back(*x);
  std::sort(xs.begin(), xs.end());

  double area = 0.0;
  std::vector<std::pair<double, double>> cuts;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double w = xs[i + 1] - xs[i];
    if (w < 1e-14) continue;
    const double xm = 0.5 * (xs[i] + xs[i + 1]);
    cuts.clear();
    for (const auto& p : polys)
      if (auto cut = vertical_cut(p, xm)) cuts.push_back(*cut);
    area += w * merged_length(cuts);
  }
  return area;
}

std::array<Vec3, 8> box3d_corners(const Box3D& box) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double hl = 0.5 * box.length(), hw = 0.5 * box.width();
  const double hh = 0.5 * box.height();
  // bottom face CCW from (+l/2,+w/2), then top face in the same order
  const std::array<Vec2, 4> local = {Vec2(hl, hw), Vec2(-hl, hw),
                                     Vec2(-hl, -hw), Vec2(hl, -hw)};
  std::array<Vec3, 8> corners;
  for (int i = 0; i < 8; ++i) {
    const Vec2& l = local[i % 4];
    const double z = box.center.z() + (i < 4 ? -hh : hh);
    corners[i] = Vec3(box.center.x() + c * l.x() - s * l.y(),
                      box.center.y() + s * l.x() + c * l.y(), z);
  }
  return corners;
}

Polygon2D box3d_footprint(const Box3D& box) {
  RotatedRect2D rect;
  rect.center = box.center.head<2>();
  rect.length = box.length();
  rect.width = box.width();
  rect.angle = box.yaw;
  const auto c = rect.corners();
  return Polygon2D{{c[0], c[1], c[2], c[3]}};
}

std::optional<Polygon2D> box3d_image_polygon(const CameraModel& camera,
                                             const Box3D& box,
                                             bool clip_to_image) {
  const auto corners = box3d_corners(box);
  std::vector<Vec2> pixels;
  pixels.reserve(8);
  for (const auto& c : corners)
    if (auto px = project_world_to_image(camera, c)) pixels.push_back(*px);
  if (pixels.empty()) return std::nullopt;
  Polygon2D hull;
  try {
    hull = convex_hull(pixels);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
  hull.partial = pixels.size() < 8;
  if (!clip_to_image) return hull;
  const double w = camera.width, h = camera.height;
  const Polygon2D frame{{Vec2(0, 0), Vec2(w, 0), Vec2(w, h), Vec2(0, h)}};
  return convex_intersect(hull, frame);
}

double rotated_rect_iou(const RotatedRect2D& a, const RotatedRect2D& b) {
  if (a.frame != b.frame)
    throw ValidationError("rotated_rect_iou", "rectangle frames differ");
  const auto ca = a.corners(), cb = b.corners();
  const Polygon2D pa{{ca[0], ca[1], ca[2], ca[3]}};
  const Polygon2D pb{{cb[0], cb[1], cb[2], cb[3]}};
  const auto inter = convex_intersect(pa, pb);
  if (!inter) return 0.0;
  const double ai = polygon_area(*inter);
  return ai / (a.area() + b.area() - ai);
}

double iou3d(const Box3D& a, const Box3D& b) {
  const auto inter = convex_intersect(box3d_footprint(a), box3d_footprint(b));
  if (!inter) return 0.0;
  const double za0 = a.center.z() - 0.5 * a.height();
  const double za1 = a.center.z() + 0.5 * a.height();
  const double zb0 = b.center.z() - 0.5 * b.height();
  const double zb1 = b.center.z() + 0.5 * b.height();
  const double dz = std::min(za1, zb1) - std::max(za0, zb0);
  if (dz <= 0) return 0.0;
  const double vol_inter = polygon_area(*inter) * dz;
  return vol_inter / (a.volume() + b.volume() - vol_inter);
}

}  // namespace bev3d
