#include "t2mx/core/rotation.hpp"

#include <algorithm>
#include <cmath>

#include "t2mx/core/error.hpp"

namespace t2mx::core {

namespace {
constexpr double kOrthoTolerance = 1e-4;
constexpr double kDegenerateNorm = 1e-8;
}  // namespace


Vector6d rot6d_from_matrix(const Eigen::Matrix3d& rotation) {
  const double deviation = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  require(deviation <= kOrthoTolerance, ErrorCode::kInvalidRotation,
          "matrix is not orthonormal (deviation " + std::to_string(deviation) + ")");
  require(rotation.determinant() > 0.0, ErrorCode::kInvalidRotation, "matrix is a reflection");
  Vector6d out;
  out.head<3>() = rotation.col(0);
  out.tail<3>() = rotation.col(1);
  return out;
}

Eigen::Matrix3d matrix_from_rot6d(const Vector6d& v) {
  const Eigen::Vector3d first = v.head<3>();
  const Eigen::Vector3d second = v.tail<3>();
  const double first_norm = first.norm();
  require(first_norm > kDegenerateNorm, ErrorCode::kDegenerate6D, "first column has zero norm");
  const Eigen::Vector3d a = first / first_norm;
  const Eigen::Vector3d residual = second - a.dot(second) * a;
  const double residual_norm = residual.norm();
  require(residual_norm > kDegenerateNorm, ErrorCode::kDegenerate6D,
          "second column is parallel to the first");
  const Eigen::Vector3d b = residual / residual_norm;
  Eigen::Matrix3d out;
  out.col(0) = a;
  out.col(1) = b;
  out.col(2) = a.cross(b);
  return out;
}

Vector6d orthonormalize_rot6d(const Vector6d& v) {
  const Eigen::Matrix3d r = matrix_from_rot6d(v);
  Vector6d out;
  out.head<3>() = r.col(0);
  out.tail<3>() = r.col(1);
  return out;
}

double rotation_angle(const Eigen::Matrix3d& rotation) {
  const double c = std::clamp((rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Eigen::Matrix3d rotation_between(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  return Eigen::Quaterniond::FromTwoVectors(from, to).toRotationMatrix();
}

Eigen::Matrix3d rotation_from_gaussian_quaternion(double w, double x, double y, double z) {
  Eigen::Quaterniond q(w, x, y, z);
  if (q.norm() < 1e-12) return Eigen::Matrix3d::Identity();
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace t2mx::core
