#ifndef TRACKFUSE_REGISTRATION_HPP
#define TRACKFUSE_REGISTRATION_HPP

#include <cstdint>
#include <vector>

#include "geometry.hpp"

namespace trackfuse {

class TsdfVolume;

// Pre-associated 3D correspondences: observed point in the camera frame
// against its map point in the object frame.
struct CorrespondenceSet {
  std::vector<Vec3> observed;  // camera frame
  std::vector<Vec3> map;       // object frame
  std::vector<double> weights;  // optional; empty means all ones

  std::size_t size() const { return observed.size(); }
};

struct PoseHypothesis {
  Pose pose;  // object -> camera
  std::vector<int> inlier_indices;
  int inlier_count = 0;
};

struct RansacConfig {
  double inlier_threshold = 0.01;  // meters
  int max_iterations = 500;        // per extraction round
  int max_hypotheses = 4;
  int min_consensus = 5;
  std::uint64_t rng_seed = 0;
};

// Weighted least-squares rigid alignment (SVD with reflection correction).
// Throws on fewer than 3 pairs or a rank-deficient cross-covariance.
Pose kabsch_align(const CorrespondenceSet& c);

// Multi-hypothesis extraction: repeated RANSAC rounds, each round's consensus
// set removed from the pool. Returns hypotheses in extraction order; empty
// when no round reaches min_consensus. Bit-reproducible for a fixed seed.
std::vector<PoseHypothesis> sequential_ransac(const CorrespondenceSet& c,
                                              const RansacConfig& cfg);

// Single-hypothesis baseline: full-set alignment, fixed-threshold outlier
// removal, then one re-alignment on the surviving pairs.
PoseHypothesis single_hypothesis_fit(const CorrespondenceSet& c, double inlier_threshold);

// Picks the hypothesis whose dense cloud lands closest to the TSDF surface
// (mean |sdf| in normalized units; out-of-volume and unseen samples cost the
// maximum 1.0). Ties break toward more inliers, then list order.
struct HypothesisSelection {
  Pose pose;
  double score = 0.0;
  int index = 0;
};
HypothesisSelection select_hypothesis(const std::vector<PoseHypothesis>& hyps,
                                      const PointCloud& dense_cloud,
                                      const TsdfVolume& volume);

}  // namespace trackfuse

#endif
