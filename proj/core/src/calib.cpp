#include "bev3d/calib.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace bev3d {

namespace {

// Similarity normalization: centroid to origin, mean distance sqrt(2).
Mat3 hartley_transform(const std::vector<Vec2>& pts) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 1e-300 ? std::sqrt(2.0) / mean_dist : 1.0;
  Mat3 t = Mat3::Identity();
  t(0, 0) = t(1, 1) = s;
  t(0, 2) = -s * centroid.x();
  t(1, 2) = -s * centroid.y();
  return t;
}

Mat3 rodrigues(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta < 1e-300) return Mat3::Identity();
  const Vec3 a = axis_angle / theta;
  Mat3 k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return Mat3::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * k * k;
}

// zoom increment is multiplicative relative to the current focals,
// matching the Jacobian's zoom column
CameraModel apply_update(const CameraModel& cam, const Eigen::VectorXd& delta,
                         bool refine_focal) {
  CameraModel out = cam;
  out.rotation = cam.rotation * rodrigues(delta.head<3>());
  out.translation = cam.translation + delta.segment<3>(3);
  if (refine_focal) {
    const double k = 1.0 + delta(6);
    out.fx = cam.fx * k;
    out.fy = cam.fy * k;
  }
  return out;
}

// Sum of squared pixel residuals, or nullopt when a point falls behind the
// near plane (the step is then rejected by the caller).
std::optional<double> cost(const CameraModel& cam,
                           const std::vector<Correspondence2D3D>& corr) {
  double sum = 0.0;
  for (const auto& c : corr) {
    const auto px = project_world_to_image(cam, c.world);
    if (!px) return std::nullopt;
    sum += (*px - c.pixel).squaredNorm();
  }
  return sum;
}

}  // namespace

Homography estimate_homography(
    const std::vector<CorrespondencePair2D>& pairs) {
  const std::size_t n = pairs.size();
  if (n < 4)
    throw ValidationError("estimate_homography", "need at least 4 pairs");

  std::vector<Vec2> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = pairs[i].source;
    dst[i] = pairs[i].target;
  }
  const Mat3 ts = hartley_transform(src);
  const Mat3 td = hartley_transform(dst);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 s = ts * Vec3(src[i].x(), src[i].y(), 1.0);
    const Vec3 d = td * Vec3(dst[i].x(), dst[i].y(), 1.0);
    const double x = s.x() / s.z(), y = s.y() / s.z();
    const double u = d.x() / d.z(), v = d.y() / d.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A proper configuration leaves exactly one (near-)null direction.
  const int last = static_cast<int>(sv.size()) - 1;
  if (last >= 1 && sv(last - 1) < 1e-10 * sv(0))
    throw ValidationError("estimate_homography",
                          "degenerate point configuration");

  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography::from_matrix(td.inverse() * hn * ts);
}

double reprojection_rmse(const CameraModel& camera,
                         const std::vector<Correspondence2D3D>& corr) {
  if (corr.empty())
    throw ValidationError("reprojection_rmse", "no correspondences");
  double sum = 0.0;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const auto px = project_world_to_image(camera, corr[i].world);
    if (!px)
      throw ValidationError(
          "reprojection_rmse.corr[" + std::to_string(i) + "]",
          "world point behind camera");
    sum += (*px - corr[i].pixel).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(corr.size()));
}

void refine_residuals_jacobian(const CameraModel& camera,
                               const std::vector<Correspondence2D3D>& corr,
                               bool refine_focal, Eigen::VectorXd& residuals,
                               Eigen::MatrixXd& jacobian) {
  const std::size_t n = corr.size();
  const int params = refine_focal ? 7 : 6;
  residuals.resize(2 * n);
  jacobian.resize(2 * n, params);
  const Mat3 rt = camera.rotation.transpose();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 q = rt * (corr[i].world - camera.translation);
    const double x = q.x(), y = q.y(), z = q.z();
    const double u = camera.fx * x / z + camera.cx;
    const double v = camera.fy * y / z + camera.cy;
    residuals(2 * i) = u - corr[i].pixel.x();
    residuals(2 * i + 1) = v - corr[i].pixel.y();

    Eigen::Matrix<double, 2, 3> duv_dq;
    duv_dq << camera.fx / z, 0, -camera.fx * x / (z * z),
              0, camera.fy / z, -camera.fy * y / (z * z);
    Mat3 q_cross;  // d q / d(rotation increment) = [q]x
    q_cross << 0, -z, y, z, 0, -x, -y, x, 0;
    jacobian.block<2, 3>(2 * i, 0) = duv_dq * q_cross;
    jacobian.block<2, 3>(2 * i, 3) = duv_dq * (-rt);
    if (refine_focal) {
      jacobian(2 * i, 6) = camera.fx * x / z;
      jacobian(2 * i + 1, 6) = camera.fy * y / z;
    }
  }
}

RefineResult refine_pose(const CameraModel& init,
                         const std::vector<Correspondence2D3D>& corr,
                         const RefineOptions& options) {
  const std::size_t min_corr = options.refine_focal ? 6 : 4;
  if (corr.size() < min_corr)
    throw ValidationError("refine_pose",
                          "need at least " + std::to_string(min_corr) +
                              " correspondences");

  CameraModel cam = init;
  auto current = cost(cam, corr);
  if (!current)
    throw ValidationError("refine_pose", "a point is behind the init camera");

  const int params = options.refine_focal ? 7 : 6;
  double lambda = options.initial_lambda;
  const auto rmse_of = [&](double c) {
    return std::sqrt(c / static_cast<double>(corr.size()));
  };

  RefineResult result;
  result.converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::VectorXd r;
    Eigen::MatrixXd j;
    refine_residuals_jacobian(cam, corr, options.refine_focal, r, j);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd jtr = j.transpose() * r;
    if (jtr.norm() < 1e-15) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal();
      const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
      if (!delta.allFinite() || delta.size() != params) break;
      const CameraModel trial =
          apply_update(cam, delta, options.refine_focal);
      const auto trial_cost = cost(trial, corr);
      if (trial_cost && *trial_cost < *current) {
        const double improvement =
            rmse_of(*current) - rmse_of(*trial_cost);
        cam = trial;
        current = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        if (improvement < options.rmse_tolerance) result.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || result.converged) {
      if (!accepted) result.converged = true;  // no descent direction left
      break;
    }
  }

  result.camera = cam;
  result.rmse = rmse_of(*current);
  result.iterations = iter;
  return result;
}

}  // namespace bev3d
