#include "sdf_refine.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace trackfuse {

namespace {

// Huber kernel in the squared-residual convention: rho(s), s = r^2.
double huber_rho(double s, double delta) {
  double d2 = delta * delta;
  return s <= d2 ? s : 2.0 * delta * std::sqrt(s) - d2;
}

double huber_weight(double s, double delta) {
  double d2 = delta * delta;
  return s <= d2 ? 1.0 : delta / std::sqrt(s);
}

// Robust cost of the cloud under pose T. Invalid samples (outside the volume
// or unseen) count at the truncation bound so the objective stays comparable
// across poses; they carry no gradient.
double robust_cost(const Pose& t, const std::vector<Vec3>& points, const TsdfVolume& vol,
                   double delta) {
  Pose inv = t.inverse();
  double sum = 0;
  for (const Vec3& p : points) {
    auto s = vol.sample_trilinear(inv * p);
    double phi = s.valid ? s.value : 1.0;
    sum += huber_rho(phi * phi, delta);
  }
  return sum / double(points.size());
}

std::vector<Vec3> subsample_cloud(const PointCloud& cloud, int max_points,
                                  std::uint64_t seed) {
  if (int(cloud.size()) <= max_points) return cloud.points;
  std::vector<int> idx(cloud.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
  Rng rng(Rng::mix(seed, cloud.size()));
  std::vector<Vec3> points;
  points.reserve(max_points);
  for (int i = 0; i < max_points; ++i) {
    int j = i + int(rng.uniform_int(idx.size() - i));
    std::swap(idx[i], idx[j]);
    points.push_back(cloud.points[idx[i]]);
  }
  return points;
}

}  // namespace

double refine_cost(const Pose& pose, const PointCloud& cloud, const TsdfVolume& volume,
                   const RefineConfig& cfg) {
  if (cloud.empty()) throw runtime_error("refine_cost: empty cloud");
  std::vector<Vec3> points = subsample_cloud(cloud, cfg.max_points, cfg.rng_seed);
  return robust_cost(pose, points, volume, cfg.huber_delta);
}

bool refine_residual_jacobian(const Pose& pose, const Vec3& point, const TsdfVolume& volume,
                              double* residual, Eigen::Matrix<double, 1, 6>* jacobian) {
  Pose inv = pose.inverse();
  Vec3 q = inv * point;
  auto s = volume.sample_trilinear(q);
  auto g = volume.sample_gradient(q);
  if (!s.valid || !g.valid) return false;
  *residual = s.value;
  // q(eps) = (exp(eps) * pose)^-1 * point; chain through y = exp(-eps)*point.
  Eigen::Matrix<double, 3, 6> dy;
  dy.leftCols<3>() = skew(point);
  dy.rightCols<3>() = -Mat3::Identity();
  *jacobian = g.gradient.transpose() * inv.rotation * dy;
  return true;
}

RefineResult refine_pose(const Pose& initial, const PointCloud& cloud,
                         const TsdfVolume& volume, const RefineConfig& cfg) {
  if (cloud.empty()) throw runtime_error("refine_pose: empty cloud");
  if (!volume.initialized() || volume.fused_count() == 0) {
    throw runtime_error("refine_pose: volume has no fused observations");
  }
  if (cfg.max_outer_iterations < 1 || cfg.huber_delta <= 0 || cfg.max_points < 1) {
    throw invalid_argument("refine_pose: invalid config");
  }

  std::vector<Vec3> points = subsample_cloud(cloud, cfg.max_points, cfg.rng_seed);

  {
    Pose inv = initial.inverse();
    int invalid = 0;
    for (const Vec3& p : points) {
      if (!volume.sample_trilinear(inv * p).valid) ++invalid;
    }
    if (invalid > int(0.8 * double(points.size()))) {
      throw runtime_error("refine_pose: refinement unreliable, >80% of points sample invalid");
    }
  }

  double initial_cost = robust_cost(initial, points, volume, cfg.huber_delta);

  auto run_outer = [&](const Pose& start, double start_cost) {
    Pose t = start;
    double cost = start_cost;
    int outer_used = 0;
    for (int outer = 0; outer < cfg.max_outer_iterations; ++outer) {
      ++outer_used;
      Pose d = Pose::identity();
      double d_cost = cost;
      double lambda = cfg.lm_initial_lambda;
      Twist last_step{};

      for (int inner = 0; inner < 20; ++inner) {
        Pose dt = d * t;
        Mat6 a = Mat6::Zero();
        Vec6 g = Vec6::Zero();
        int valid = 0;
        for (const Vec3& p : points) {
          double r;
          Eigen::Matrix<double, 1, 6> j;
          if (!refine_residual_jacobian(dt, p, volume, &r, &j)) continue;
          double w = huber_weight(r * r, cfg.huber_delta);
          a += w * j.transpose() * j;
          g += w * j.transpose() * r;
          ++valid;
        }
        if (valid < 6) break;

        bool accepted = false;
        while (lambda < 1e8) {
          Mat6 damped = a;
          for (int k = 0; k < 6; ++k) {
            damped(k, k) += lambda * std::max(a(k, k), 1e-12);
          }
          Vec6 step = damped.ldlt().solve(-g);
          if (!step.allFinite()) {
            lambda *= cfg.lm_lambda_factor;
            continue;
          }
          Pose candidate = se3_exp(Twist::from_vector(step)) * d;
          double candidate_cost = robust_cost(candidate * t, points, volume, cfg.huber_delta);
          if (candidate_cost < d_cost) {
            d = candidate;
            d_cost = candidate_cost;
            lambda = std::max(lambda / cfg.lm_lambda_factor, 1e-12);
            last_step = Twist::from_vector(step);
            accepted = true;
            break;
          }
          lambda *= cfg.lm_lambda_factor;
        }
        if (!accepted) break;
        if (last_step.norm() < cfg.convergence_tol) break;
      }

      if (d_cost >= cost) break;  // no usable increment this round
      t = (d * t).orthonormalized();
      cost = d_cost;
      if (se3_log(d).norm() < cfg.convergence_tol) break;
    }
    return RefineResult{t, cost, outer_used};
  };

  RefineResult best = run_outer(initial, initial_cost);

  // Degenerate-start rescue: when nearly everything began outside the
  // truncation band, the LM gradient carries no capture signal. Retry from a
  // translation bootstrap that matches the cloud centroid to the observed
  // near-surface voxel centroid; since the cloud covers only camera-facing
  // surfaces, slide along the mean view direction to find the cheapest
  // placement. Keep whichever result costs less.
  if (initial_cost > 0.45) {
    auto centroid = volume.surface_centroid();
    if (centroid.valid) {
      Pose inv = initial.inverse();
      Vec3 cloud_centroid = Vec3::Zero();
      for (const Vec3& p : points) cloud_centroid += inv * p;
      cloud_centroid /= double(points.size());
      Vec3 view_dir = cloud_centroid - inv.translation;  // camera center to cloud
      if (view_dir.norm() > 1e-9) view_dir.normalize();

      Vec3 delta0 = cloud_centroid - centroid.position;
      double tau = volume.truncation();
      Pose boot;
      double boot_cost = initial_cost;
      bool found = false;
      for (int s = -8; s <= 8; ++s) {
        Pose candidate = initial;
        candidate.translation +=
            initial.rotation * (delta0 - (0.5 * tau * s) * view_dir);
        double c = robust_cost(candidate, points, volume, cfg.huber_delta);
        if (c < boot_cost) {
          boot = candidate;
          boot_cost = c;
          found = true;
        }
      }
      if (found) {
        RefineResult rescued = run_outer(boot, boot_cost);
        if (rescued.final_cost < best.final_cost) best = rescued;
      }
    }
  }
  return best;
}

}  // namespace trackfuse
