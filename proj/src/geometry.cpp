#include "geometry.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace trackfuse {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSmallAngle = 1e-8;
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::from_matrix(const Mat4& m) {
  return Pose{m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Pose Pose::orthonormalized() const {
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return Pose{r, translation};
}

Mat3 so3_exp(const Vec3& omega) {
  double theta = omega.norm();
  Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + w + 0.5 * w * w;
  }
  double s = std::sin(theta), c = std::cos(theta);
  return Mat3::Identity() + (s / theta) * w + ((1.0 - c) / (theta * theta)) * w * w;
}

Vec3 so3_log(const Mat3& rotation) {
  double c = 0.5 * (rotation.trace() - 1.0);
  c = std::min(1.0, std::max(-1.0, c));
  double theta = std::acos(c);
  if (theta > kPi - 1e-6) {
    throw runtime_error("so3_log: rotation angle within 1e-6 of pi (singular)");
  }
  Vec3 vee(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
           rotation(1, 0) - rotation(0, 1));
  if (theta < kSmallAngle) {
    return 0.5 * (1.0 + theta * theta / 6.0) * vee;
  }
  return (theta / (2.0 * std::sin(theta))) * vee;
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  double theta = omega.norm();
  Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  }
  double t2 = theta * theta;
  return Mat3::Identity() + ((1.0 - std::cos(theta)) / t2) * w +
         ((theta - std::sin(theta)) / (t2 * theta)) * w * w;
}

Mat3 so3_left_jacobian_inv(const Vec3& omega) {
  double theta = omega.norm();
  Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() - 0.5 * w + (1.0 / 12.0) * w * w;
  }
  double t2 = theta * theta;
  double coeff = 1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() - 0.5 * w + coeff * w * w;
}

Pose se3_exp(const Twist& xi) {
  return Pose{so3_exp(xi.rotational), so3_left_jacobian(xi.rotational) * xi.translational};
}

Twist se3_log(const Pose& pose) {
  Vec3 omega = so3_log(pose.rotation);
  Vec3 nu = so3_left_jacobian_inv(omega) * pose.translation;
  return Twist{omega, nu};
}

Mat6 se3_adjoint(const Pose& pose) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = pose.rotation;
  ad.bottomRightCorner<3, 3>() = pose.rotation;
  ad.bottomLeftCorner<3, 3>() = skew(pose.translation) * pose.rotation;
  return ad;
}

namespace {

// Barfoot's Q(rho, phi) block of the SE(3) left Jacobian.
Mat3 se3_jacobian_q(const Vec3& rho, const Vec3& phi) {
  double theta = phi.norm();
  Mat3 rx = skew(rho);
  Mat3 px = skew(phi);
  double q2, q3, q4;
  if (theta < 1e-4) {
    double t2 = theta * theta;
    q2 = 1.0 / 6.0 - t2 / 120.0;
    q3 = 1.0 / 24.0 - t2 / 720.0;
    q4 = 1.0 / 120.0 - t2 / 2520.0;
  } else {
    double t2 = theta * theta;
    double t3 = t2 * theta;
    double t4 = t3 * theta;
    double t5 = t4 * theta;
    double s = std::sin(theta), c = std::cos(theta);
    q2 = (theta - s) / t3;
    q3 = (t2 + 2.0 * c - 2.0) / (2.0 * t4);
    q4 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t5);
  }
  Mat3 q = 0.5 * rx;
  q += q2 * (px * rx + rx * px + px * rx * px);
  q += q3 * (px * px * rx + rx * px * px - 3.0 * px * rx * px);
  q += q4 * (px * rx * px * px + px * px * rx * px);
  return q;
}

}  // namespace

Mat6 se3_left_jacobian(const Twist& xi) {
  Mat3 jl = so3_left_jacobian(xi.rotational);
  Mat3 q = se3_jacobian_q(xi.translational, xi.rotational);
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = jl;
  j.bottomRightCorner<3, 3>() = jl;
  j.bottomLeftCorner<3, 3>() = q;
  return j;
}

Mat6 se3_left_jacobian_inv(const Twist& xi) {
  Mat3 jli = so3_left_jacobian_inv(xi.rotational);
  Mat3 q = se3_jacobian_q(xi.translational, xi.rotational);
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = jli;
  j.bottomRightCorner<3, 3>() = jli;
  j.bottomLeftCorner<3, 3>() = -jli * q * jli;
  return j;
}

double rotation_distance(const Mat3& a, const Mat3& b) {
  Mat3 r = a.transpose() * b;
  double s = 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)).norm();
  double c = 0.5 * (r.trace() - 1.0);
  // atan2 keeps full precision near both 0 and pi, unlike acos.
  return std::atan2(std::min(1.0, s), std::min(1.0, std::max(-1.0, c)));
}

}  // namespace trackfuse
