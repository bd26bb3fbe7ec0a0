#ifndef TRACKFUSE_SDF_REFINE_HPP
#define TRACKFUSE_SDF_REFINE_HPP

#include <cstdint>

#include "geometry.hpp"
#include "tsdf.hpp"

namespace trackfuse {

struct RefineConfig {
  int max_outer_iterations = 10;
  double huber_delta = 0.5;  // normalized-sdf units (half the truncation band)
  double lm_initial_lambda = 1e-3;
  double lm_lambda_factor = 10.0;
  double convergence_tol = 1e-6;  // twist norm
  int max_points = 2000;
  std::uint64_t rng_seed = 0x5eedULL;
};

struct RefineResult {
  Pose pose;
  double final_cost = 0.0;
  int iterations = 0;  // outer iterations executed
};

// Drives the camera-frame cloud onto the TSDF zero isosurface by robust
// Levenberg-Marquardt over a left-increment pose D, updating T <- D*T each
// outer round. The robust cost never increases across accepted steps; the
// returned pose is never worse than the input under that cost.
// Throws when more than 80% of the (subsampled) points sample invalid at the
// initial pose; callers keep the initial pose in that case.
RefineResult refine_pose(const Pose& initial, const PointCloud& cloud,
                         const TsdfVolume& volume, const RefineConfig& cfg);

// Robust cost of the cloud at a pose, using the same subsampling and penalty
// convention as refine_pose. Lets callers compare poses on equal footing.
double refine_cost(const Pose& pose, const PointCloud& cloud, const TsdfVolume& volume,
                   const RefineConfig& cfg);

// Per-point residual Jacobian at the identity increment, exposed for the
// finite-difference verification tests.
bool refine_residual_jacobian(const Pose& pose, const Vec3& point, const TsdfVolume& volume,
                              double* residual, Eigen::Matrix<double, 1, 6>* jacobian);

}  // namespace trackfuse

#endif
