#include "registration.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "rng.hpp"
#include "tsdf.hpp"

namespace trackfuse {

Pose kabsch_align(const CorrespondenceSet& c) {
  const std::size_t n = c.size();
  if (n < 3) throw runtime_error("kabsch_align: fewer than 3 correspondences");
  if (c.map.size() != n) throw invalid_argument("kabsch_align: size mismatch");

  double wsum = 0;
  Vec3 c_map = Vec3::Zero(), c_obs = Vec3::Zero();
  auto weight = [&](std::size_t i) { return c.weights.empty() ? 1.0 : c.weights[i]; };
  for (std::size_t i = 0; i < n; ++i) {
    double w = weight(i);
    wsum += w;
    c_map += w * c.map[i];
    c_obs += w * c.observed[i];
  }
  if (wsum <= 0) throw runtime_error("kabsch_align: nonpositive total weight");
  c_map /= wsum;
  c_obs /= wsum;

  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += weight(i) * (c.map[i] - c_map) * (c.observed[i] - c_obs).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3& sv = svd.singularValues();
  // Rotation is only determined when the point sets span at least a plane.
  if (sv(1) <= 1e-12 * std::max(1.0, sv(0))) {
    throw runtime_error("kabsch_align: degenerate configuration (collinear or coincident points)");
  }
  Mat3 d = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;
  Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  return Pose{r, c_obs - r * c_map};
}

namespace {

std::vector<int> count_inliers(const CorrespondenceSet& c, const std::vector<int>& pool,
                               const Pose& t, double threshold) {
  std::vector<int> inliers;
  inliers.reserve(pool.size());
  for (int idx : pool) {
    if ((c.observed[idx] - t * c.map[idx]).norm() < threshold) inliers.push_back(idx);
  }
  return inliers;
}

CorrespondenceSet subset(const CorrespondenceSet& c, const std::vector<int>& idx) {
  CorrespondenceSet s;
  s.observed.reserve(idx.size());
  s.map.reserve(idx.size());
  for (int i : idx) {
    s.observed.push_back(c.observed[i]);
    s.map.push_back(c.map[i]);
    if (!c.weights.empty()) s.weights.push_back(c.weights[i]);
  }
  return s;
}

}  // namespace

std::vector<PoseHypothesis> sequential_ransac(const CorrespondenceSet& c,
                                              const RansacConfig& cfg) {
  if (c.size() < 3) throw runtime_error("sequential_ransac: fewer than 3 correspondences");
  if (cfg.inlier_threshold <= 0 || cfg.max_hypotheses < 1) {
    throw invalid_argument("sequential_ransac: invalid config");
  }

  std::vector<int> pool(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) pool[i] = int(i);

  std::vector<PoseHypothesis> hypotheses;
  for (int round = 0; round < cfg.max_hypotheses; ++round) {
    if (int(pool.size()) < std::max(3, cfg.min_consensus)) break;

    Rng rng(Rng::mix(cfg.rng_seed, std::uint64_t(round)));
    std::vector<int> best_inliers;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
      // Minimal 3-point sample without replacement.
      int a = int(rng.uniform_int(pool.size()));
      int b = int(rng.uniform_int(pool.size()));
      int d = int(rng.uniform_int(pool.size()));
      if (a == b || a == d || b == d) continue;
      CorrespondenceSet sample;
      sample.observed = {c.observed[pool[a]], c.observed[pool[b]], c.observed[pool[d]]};
      sample.map = {c.map[pool[a]], c.map[pool[b]], c.map[pool[d]]};
      Pose t;
      try {
        t = kabsch_align(sample);
      } catch (const Error&) {
        continue;  // collinear sample
      }
      std::vector<int> inliers = count_inliers(c, pool, t, cfg.inlier_threshold);
      if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
    }
    if (int(best_inliers.size()) < std::max(3, cfg.min_consensus)) break;

    // Refit on the full consensus set, then recount against the refit pose.
    Pose refined;
    try {
      refined = kabsch_align(subset(c, best_inliers));
    } catch (const Error&) {
      break;
    }
    std::vector<int> consensus = count_inliers(c, pool, refined, cfg.inlier_threshold);
    if (int(consensus.size()) < cfg.min_consensus) break;

    PoseHypothesis hyp;
    hyp.pose = refined;
    hyp.inlier_indices = consensus;
    hyp.inlier_count = int(consensus.size());
    hypotheses.push_back(std::move(hyp));

    std::vector<int> remaining;
    remaining.reserve(pool.size());
    std::size_t ci = 0;
    for (int idx : pool) {
      while (ci < consensus.size() && consensus[ci] < idx) ++ci;
      if (ci < consensus.size() && consensus[ci] == idx) continue;
      remaining.push_back(idx);
    }
    pool = std::move(remaining);
  }
  return hypotheses;
}

PoseHypothesis single_hypothesis_fit(const CorrespondenceSet& c, double inlier_threshold) {
  Pose initial = kabsch_align(c);
  std::vector<int> all(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) all[i] = int(i);
  std::vector<int> kept = count_inliers(c, all, initial, inlier_threshold);
  PoseHypothesis hyp;
  if (kept.size() >= 3) {
    try {
      hyp.pose = kabsch_align(subset(c, kept));
    } catch (const Error&) {
      hyp.pose = initial;
    }
  } else {
    hyp.pose = initial;
    kept = all;
  }
  hyp.inlier_indices = kept;
  hyp.inlier_count = int(kept.size());
  return hyp;
}

HypothesisSelection select_hypothesis(const std::vector<PoseHypothesis>& hyps,
                                      const PointCloud& dense_cloud,
                                      const TsdfVolume& volume) {
  if (hyps.empty()) throw runtime_error("select_hypothesis: empty hypothesis list");
  if (dense_cloud.empty()) throw runtime_error("select_hypothesis: empty dense cloud");
  if (!volume.initialized() || volume.fused_count() < 1) {
    throw runtime_error("select_hypothesis: volume has no fused observations");
  }

  HypothesisSelection best;
  double best_score = 0;
  int best_inliers = -1;
  for (std::size_t h = 0; h < hyps.size(); ++h) {
    Pose cam_to_obj = hyps[h].pose.inverse();
    double sum = 0;
    for (const Vec3& p : dense_cloud.points) {
      TsdfVolume::Sample s = volume.sample_trilinear(cam_to_obj * p);
      sum += s.valid ? std::abs(s.value) : 1.0;  // unseen space costs the truncation bound
    }
    double score = sum / double(dense_cloud.size());
    bool take = h == 0 || score < best_score ||
                (score == best_score && hyps[h].inlier_count > best_inliers);
    if (take) {
      best_score = score;
      best_inliers = hyps[h].inlier_count;
      best = HypothesisSelection{hyps[h].pose, score, int(h)};
    }
  }
  return best;
}

}  // namespace trackfuse
