#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace t2mx::core {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Continuous 6D representation: the first two columns of R, column-major.
/// Throws kInvalidRotation when R deviates from SO(3) by more than 1e-4
/// (Frobenius norm of RᵀR − I, or a reflection).
Vector6d rot6d_from_matrix(const Eigen::Matrix3d& rotation);

/// Gram-Schmidt completion of a 6D vector into a proper rotation. Throws
/// kDegenerate6D when either column is (near) zero or the two are parallel.
Eigen::Matrix3d matrix_from_rot6d(const Vector6d& v);

/// Projects an arbitrary (e.g. interpolated or filtered) 6D vector back onto
/// the canonical form of the rotation it denotes.
Vector6d orthonormalize_rot6d(const Vector6d& v);

inline Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Rotation about the vertical (y) axis.
inline Eigen::Matrix3d heading_rotation(double angle) {
  return Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

/// Angle of the rotation in [0, π].
double rotation_angle(const Eigen::Matrix3d& rotation);

/// Minimal-arc rotation taking direction `from` onto direction `to`.
Eigen::Matrix3d rotation_between(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

/// Uniformly distributed rotation from four standard normal draws.
Eigen::Matrix3d rotation_from_gaussian_quaternion(double w, double x, double y, double z);

}  // namespace t2mx::core
