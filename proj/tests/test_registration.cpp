#include <doctest.h>

#include <set>

#include "registration.hpp"
#include "rng.hpp"
#include "test_render.hpp"
#include "test_util.hpp"
#include "tsdf.hpp"

using namespace trackfuse;
using namespace trackfuse::testutil;

namespace {

CorrespondenceSet make_instance(Rng& rng, const Pose& t, int n, double noise = 0.0) {
  CorrespondenceSet c;
  for (int i = 0; i < n; ++i) {
    Vec3 p(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    Vec3 obs = t * p;
    if (noise > 0) obs += Vec3(rng.normal(0, noise), rng.normal(0, noise), rng.normal(0, noise));
    c.map.push_back(p);
    c.observed.push_back(obs);
  }
  return c;
}

bool pose_close(const Pose& a, const Pose& b, double rot_tol, double trans_tol) {
  return rotation_distance(a.rotation, b.rotation) < rot_tol &&
         (a.translation - b.translation).norm() < trans_tol;
}

}  // namespace

TEST_SUITE_BEGIN("registration");

TEST_CASE("kabsch on identity and pure translation") {
  Rng rng(100);
  CorrespondenceSet c = make_instance(rng, Pose::identity(), 10);
  CHECK(max_abs_diff(kabsch_align(c), Pose::identity()) < 1e-12);

  Pose shift{Mat3::Identity(), Vec3(0.1, 0, 0)};
  c = make_instance(rng, shift, 10);
  Pose got = kabsch_align(c);
  CHECK(rotation_distance(got.rotation, Mat3::Identity()) < 1e-12);
  CHECK((got.translation - Vec3(0.1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("kabsch recovers random poses exactly on noiseless data") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    Pose t = random_pose(rng, 3.0, 0.5);
    int n = 3 + int(rng.uniform_int(48));
    CorrespondenceSet c = make_instance(rng, t, n);
    Pose got = kabsch_align(c);
    CHECK(rotation_distance(got.rotation, t.rotation) < 1e-9);
    CHECK((got.translation - t.translation).norm() < 1e-9);
  }
}

TEST_CASE("weighted kabsch ignores zero-weight outliers") {
  Rng rng(102);
  Pose t = random_pose(rng, 2.0, 0.3);
  CorrespondenceSet c = make_instance(rng, t, 20);
  c.weights.assign(20, 1.0);
  c.map.push_back(Vec3(0.05, 0.02, -0.03));
  c.observed.push_back(Vec3(9, 9, 9));
  c.weights.push_back(0.0);
  Pose got = kabsch_align(c);
  CHECK(pose_close(got, t, 1e-9, 1e-9));
}

TEST_CASE("kabsch degenerate configurations") {
  CorrespondenceSet two;
  two.map = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  two.observed = two.map;
  CHECK_THROWS_AS(kabsch_align(two), Error);

  CorrespondenceSet collinear;
  for (int i = 0; i < 5; ++i) {
    collinear.map.push_back(Vec3(0.01 * i, 0, 0));
    collinear.observed.push_back(Vec3(0.01 * i, 0, 0));
  }
  CHECK_THROWS_AS(kabsch_align(collinear), Error);
}

TEST_CASE("sequential ransac: single rigid motion yields one exact hypothesis") {
  Rng rng(103);
  Pose t = random_pose(rng, 1.5, 0.2);
  CorrespondenceSet c = make_instance(rng, t, 40);
  RansacConfig cfg;
  cfg.rng_seed = 77;
  auto hyps = sequential_ransac(c, cfg);
  REQUIRE(hyps.size() == 1);
  CHECK(hyps[0].inlier_count == 40);
  CHECK(max_abs_diff(hyps[0].pose, kabsch_align(c)) < 1e-9);
}

TEST_CASE("sequential ransac: two motions recovered in dominance order") {
  Rng rng(104);
  Pose a = random_pose(rng, 1.0, 0.2);
  Pose b = random_pose(rng, 1.0, 0.2);
  CorrespondenceSet c = make_instance(rng, a, 60);
  CorrespondenceSet cb = make_instance(rng, b, 40);
  c.map.insert(c.map.end(), cb.map.begin(), cb.map.end());
  c.observed.insert(c.observed.end(), cb.observed.begin(), cb.observed.end());

  RansacConfig cfg;
  cfg.inlier_threshold = 0.001;
  cfg.rng_seed = 9;
  auto hyps = sequential_ransac(c, cfg);
  REQUIRE(hyps.size() == 2);
  CHECK(hyps[0].inlier_count == 60);
  CHECK(hyps[1].inlier_count == 40);
  CHECK(pose_close(hyps[0].pose, a, 1e-6, 1e-6));
  CHECK(pose_close(hyps[1].pose, b, 1e-6, 1e-6));

  // Consensus sets are pairwise disjoint.
  std::set<int> seen;
  for (const auto& h : hyps) {
    for (int idx : h.inlier_indices) {
      CHECK(seen.insert(idx).second);
    }
  }
}

TEST_CASE("single-hypothesis baseline misses the minority motion") {
  Rng rng(105);
  Pose a{so3_exp(Vec3(0, 0, 0.02)), Vec3(0.001, 0, 0)};  // near-identity majority
  Pose b{so3_exp(Vec3(0, 0.6, 0)), Vec3(0.02, -0.01, 0.01)};
  CorrespondenceSet c = make_instance(rng, a, 60, 0.001);
  CorrespondenceSet cb = make_instance(rng, b, 40, 0.001);
  c.map.insert(c.map.end(), cb.map.begin(), cb.map.end());
  c.observed.insert(c.observed.end(), cb.observed.begin(), cb.observed.end());

  RansacConfig cfg;
  cfg.rng_seed = 4;
  auto hyps = sequential_ransac(c, cfg);
  bool minority_present = false;
  for (const auto& h : hyps) {
    if (pose_close(h.pose, b, 0.05, 0.01)) minority_present = true;
  }
  CHECK(minority_present);

  PoseHypothesis single = single_hypothesis_fit(c, cfg.inlier_threshold);
  CHECK_FALSE(pose_close(single.pose, b, 0.05, 0.01));
}

TEST_CASE("sequential ransac is reproducible for a fixed seed and rejects tiny sets") {
  Rng rng(106);
  Pose a = random_pose(rng, 1.0, 0.2);
  CorrespondenceSet c = make_instance(rng, a, 30, 0.002);
  RansacConfig cfg;
  cfg.rng_seed = 123;
  auto h1 = sequential_ransac(c, cfg);
  auto h2 = sequential_ransac(c, cfg);
  REQUIRE(h1.size() == h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) {
    CHECK((h1[i].pose.matrix() - h2[i].pose.matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h1[i].inlier_indices == h2[i].inlier_indices);
  }

  CorrespondenceSet two;
  two.map = {Vec3(0, 0, 0), Vec3(0.1, 0, 0)};
  two.observed = two.map;
  CHECK_THROWS_AS(sequential_ransac(two, cfg), Error);
}

TEST_CASE("hypothesis selection scores against the fused volume") {
  CameraModel cam{120, 120, 60, 60, 120, 120};
  Pose box_in_obj{Mat3::Identity(), Vec3(0, 0, 0.5)};
  Vec3 half(0.05, 0.04, 0.03);

  TsdfVolume vol(Vec3(-0.15, -0.15, 0.3), Vec3(0.15, 0.15, 0.7), 0.004, 0.012);
  for (const Pose& rel : turntable_poses(12, 0.0)) {
    // Rotate the box about its own center, camera fixed.
    Pose pose{rel.rotation, box_in_obj.translation - rel.rotation * box_in_obj.translation};
    vol.integrate(render_box_view(cam, pose, box_in_obj, half));
  }

  // Dense cloud from the true surface at the true (identity) pose.
  DepthObservation view = render_box_view(cam, Pose::identity(), box_in_obj, half);
  PointCloud cloud;
  for (int v = 0; v < cam.height; v += 2) {
    for (int u = 0; u < cam.width; u += 2) {
      if (view.mask(u, v)) cloud.points.push_back(cam.back_project(Vec2(u, v), view.depth(u, v)));
    }
  }
  REQUIRE(cloud.size() > 100);

  PoseHypothesis truth;
  truth.pose = Pose::identity();
  truth.inlier_count = 10;
  PoseHypothesis offset;
  offset.pose = Pose{Mat3::Identity(), Vec3(0.05, 0, 0)};
  offset.inlier_count = 10;

  SUBCASE("single hypothesis returned regardless of score") {
    auto sel = select_hypothesis({offset}, cloud, vol);
    CHECK(sel.index == 0);
  }
  SUBCASE("true pose scores strictly lower than a 5 cm offset") {
    auto sel = select_hypothesis({offset, truth}, cloud, vol);
    CHECK(sel.index == 1);
    Pose inv = offset.pose.inverse();
    double off_score = 0;
    for (const Vec3& p : cloud.points) {
      auto s = vol.sample_trilinear(inv * p);
      off_score += s.valid ? std::abs(s.value) : 1.0;
    }
    off_score /= double(cloud.size());
    CHECK(sel.score < off_score);
  }
  SUBCASE("ties break toward the larger inlier count") {
    PoseHypothesis t2 = truth;
    t2.inlier_count = 20;
    auto sel = select_hypothesis({truth, t2}, cloud, vol);
    CHECK(sel.index == 1);
  }
  SUBCASE("empty inputs are errors") {
    CHECK_THROWS_AS(select_hypothesis({}, cloud, vol), Error);
    CHECK_THROWS_AS(select_hypothesis({truth}, PointCloud{}, vol), Error);
  }
}

TEST_SUITE_END();
