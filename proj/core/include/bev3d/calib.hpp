#pragma once

#include "bev3d/camgeo.hpp"
#include "bev3d/types.hpp"

#include <vector>

namespace bev3d {

struct Correspondence2D3D {
  Vec3 world;
  Vec2 pixel;
};

struct CorrespondencePair2D {
  Vec2 source;
  Vec2 target;
};

/// Levenberg-Marquardt controls. Focal refinement uses a single zoom scale
/// applied to both fx and fy; the principal point stays fixed.
struct RefineOptions {
  bool refine_focal = false;
  int max_iterations = 100;
  double initial_lambda = 1e-3;
  double rmse_tolerance = 1e-12;  // stop when improvement drops below this
};

struct RefineResult {
  CameraModel camera;
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Normalized DLT (Hartley normalization, SVD least squares), h33 = 1.
// Throws on < 4 pairs or a rank-deficient configuration.
Homography estimate_homography(const std::vector<CorrespondencePair2D>& pairs);

// Root-mean-square pixel residual. Throws (naming the index) when a world
// point lies behind the camera.
double reprojection_rmse(const CameraModel& camera,
                         const std::vector<Correspondence2D3D>& corr);

// Minimizes the summed squared reprojection error over the camera pose
// (axis-angle increment on rotation, translation) and optionally a tied
// focal zoom. Never returns a camera with higher RMSE than the input.
RefineResult refine_pose(const CameraModel& init,
                         const std::vector<Correspondence2D3D>& corr,
                         const RefineOptions& options = {});

// Residuals (2 per correspondence, predicted minus observed) and the
// analytic Jacobian at the given camera: columns are rotation increment
// (3), camera-center increment (3), and zoom scale when refine_focal.
// Exposed so the Jacobian can be checked against finite differences.
void refine_residuals_jacobian(const CameraModel& camera,
                               const std::vector<Correspondence2D3D>& corr,
                               bool refine_focal, Eigen::VectorXd& residuals,
                               Eigen::MatrixXd& jacobian);

}  // namespace bev3d
