#ifndef TRACKFUSE_TEST_RENDER_HPP
#define TRACKFUSE_TEST_RENDER_HPP

// Closed-form ray-intersection depth renderers used as oracles. Kept
// independent of the simulator's sphere tracer on purpose.

#include <cmath>
#include <limits>

#include "geometry.hpp"
#include "tsdf.hpp"

namespace trackfuse::testutil {

inline Vec3 pixel_ray(const CameraModel& cam, int u, int v) {
  return Vec3((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0).normalized();
}

// Smallest positive ray parameter hitting a sphere, or +inf.
inline double ray_sphere(const Vec3& dir, const Vec3& center, double radius) {
  double b = dir.dot(center);
  double disc = b * b - center.squaredNorm() + radius * radius;
  if (disc < 0) return std::numeric_limits<double>::infinity();
  double s = b - std::sqrt(disc);
  if (s <= 0) s = b + std::sqrt(disc);
  return s > 0 ? s : std::numeric_limits<double>::infinity();
}

// Slab test against an axis-aligned box in the box frame given by box_pose
// (box frame -> camera frame).
inline double ray_box(const Vec3& dir, const Pose& box_pose, const Vec3& half) {
  Pose inv = box_pose.inverse();
  Vec3 o = inv.translation;
  Vec3 d = inv.rotation * dir;
  double tmin = 0, tmax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-12) {
      if (o[a] < -half[a] || o[a] > half[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t1 = (-half[a] - o[a]) / d[a];
    double t2 = (half[a] - o[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmax < tmin || tmax <= 0) return std::numeric_limits<double>::infinity();
  return tmin > 0 ? tmin : std::numeric_limits<double>::infinity();
}

// Renders a sphere given in the object frame, observed under pose
// (object -> camera). Depth is z-depth; mask marks hit pixels.
inline DepthObservation render_sphere_view(const CameraModel& cam, const Pose& pose,
                                           const Vec3& center_obj, double radius) {
  DepthObservation obs;
  obs.camera = cam;
  obs.pose = pose;
  obs.depth = DepthImage(cam.width, cam.height, 0.f);
  obs.mask = MaskImage(cam.width, cam.height, 0);
  Vec3 center_cam = pose * center_obj;
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      Vec3 dir = pixel_ray(cam, u, v);
      double s = ray_sphere(dir, center_cam, radius);
      if (std::isfinite(s)) {
        obs.depth(u, v) = float(s * dir.z());
        obs.mask(u, v) = 1;
      }
    }
  }
  return obs;
}

inline DepthObservation render_box_view(const CameraModel& cam, const Pose& pose,
                                        const Pose& box_in_obj, const Vec3& half) {
  DepthObservation obs;
  obs.camera = cam;
  obs.pose = pose;
  obs.depth = DepthImage(cam.width, cam.height, 0.f);
  obs.mask = MaskImage(cam.width, cam.height, 0);
  Pose box_in_cam = pose * box_in_obj;
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      Vec3 dir = pixel_ray(cam, u, v);
      double s = ray_box(dir, box_in_cam, half);
      if (std::isfinite(s)) {
        obs.depth(u, v) = float(s * dir.z());
        obs.mask(u, v) = 1;
      }
    }
  }
  return obs;
}

// Merges view b into a (nearest surface wins).
inline void merge_views(DepthObservation& a, const DepthObservation& b) {
  for (std::size_t i = 0; i < a.depth.data.size(); ++i) {
    if (b.mask.data[i] && (!a.mask.data[i] || b.depth.data[i] < a.depth.data[i])) {
      a.depth.data[i] = b.depth.data[i];
      a.mask.data[i] = 1;
    }
  }
}

// Asymmetric corner bracket: three box arms meeting near one corner. Centered
// around (0,0,0.5) in the object frame.
inline DepthObservation render_bracket_view(const CameraModel& cam, const Pose& pose) {
  DepthObservation acc =
      render_box_view(cam, pose, Pose{Mat3::Identity(), Vec3(0.016, 0, 0.5)},
                      Vec3(0.05, 0.018, 0.018));
  DepthObservation b =
      render_box_view(cam, pose, Pose{Mat3::Identity(), Vec3(-0.02, 0.027, 0.5)},
                      Vec3(0.018, 0.045, 0.018));
  DepthObservation c =
      render_box_view(cam, pose, Pose{Mat3::Identity(), Vec3(-0.02, -0.01, 0.525)},
                      Vec3(0.018, 0.018, 0.035));
  merge_views(acc, b);
  merge_views(acc, c);
  return acc;
}

// Orbit-style pose set covering the view sphere: rotations about +y then +x.
inline std::vector<Pose> turntable_poses(int count, double distance) {
  std::vector<Pose> poses;
  int half = std::max(1, count / 2);
  for (int k = 0; k < count; ++k) {
    Vec3 axis = (k < half) ? Vec3(0, 1, 0) : Vec3(1, 0, 0);
    int j = (k < half) ? k : k - half;
    double angle = 2.0 * M_PI * j / half + (k < half ? 0.0 : M_PI / 7);
    poses.push_back(Pose{so3_exp(axis * angle), Vec3(0, 0, distance)});
  }
  return poses;
}

}  // namespace trackfuse::testutil

#endif
