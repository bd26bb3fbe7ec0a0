#ifndef TRACKFUSE_GEOMETRY_HPP
#define TRACKFUSE_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "errors.hpp"

namespace trackfuse {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

Mat3 skew(const Vec3& v);

// Rigid transform. Rotations live as matrices; quaternions appear only in
// file I/O if ever needed. All lengths in meters, angles in radians.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  // Composition: (a*b) maps points as a applied after b.
  Pose operator*(const Pose& b) const {
    return Pose{rotation * b.rotation, rotation * b.translation + translation};
  }

  Pose inverse() const {
    Mat3 rt = rotation.transpose();
    return Pose{rt, -(rt * translation)};
  }

  Mat4 matrix() const;
  static Pose from_matrix(const Mat4& m);

  // Projects the rotation back onto SO(3) (nearest orthonormal matrix).
  Pose orthonormalized() const;
};

// se(3) element, ordered (rotational, translational) in the stacked 6-vector.
struct Twist {
  Vec3 rotational = Vec3::Zero();
  Vec3 translational = Vec3::Zero();

  Vec6 vector() const {
    Vec6 v;
    v << rotational, translational;
    return v;
  }
  static Twist from_vector(const Vec6& v) {
    return Twist{v.head<3>(), v.tail<3>()};
  }
  double norm() const { return vector().norm(); }
};

Mat3 so3_exp(const Vec3& omega);
// Throws for rotation angle within 1e-6 of pi (logarithm singularity).
Vec3 so3_log(const Mat3& rotation);

Pose se3_exp(const Twist& xi);
Twist se3_log(const Pose& pose);

// Left Jacobian of SO(3) and its inverse.
Mat3 so3_left_jacobian(const Vec3& omega);
Mat3 so3_left_jacobian_inv(const Vec3& omega);

// Adjoint of SE(3) in (rot, trans) ordering: exp(adjoint(T) xi) = T exp(xi) T^-1.
Mat6 se3_adjoint(const Pose& pose);

// Left Jacobian of SE(3) and its inverse, (rot, trans) ordering:
// exp(xi + d) ~ exp(J_l(xi) d) * exp(xi).
Mat6 se3_left_jacobian(const Twist& xi);
Mat6 se3_left_jacobian_inv(const Twist& xi);

// d log(Z exp(d))/dd at d=0, i.e. the inverse right Jacobian at log(Z).
inline Mat6 se3_right_jacobian_inv(const Twist& xi) {
  return se3_left_jacobian_inv(Twist{-xi.rotational, -xi.translational});
}

// Geodesic distance on SO(3) between two rotations, radians.
double rotation_distance(const Mat3& a, const Mat3& b);

// Pinhole camera; pixel origin at the top-left corner, z-depth convention.
struct CameraModel {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  Vec2 project(const Vec3& p) const {
    if (p.z() <= 0.0) throw runtime_error("project: non-positive depth");
    return Vec2(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
  }

  Vec3 back_project(const Vec2& uv, double depth) const {
    if (depth <= 0.0) throw runtime_error("back_project: non-positive depth");
    return Vec3((uv.x() - cx) * depth / fx, (uv.y() - cy) * depth / fy, depth);
  }

  bool contains(const Vec2& uv) const {
    return uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() <= width - 1.0 &&
           uv.y() <= height - 1.0;
  }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> colors;  // optional; empty or same size as points, RGB in [0,1]

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

}  // namespace trackfuse

#endif
