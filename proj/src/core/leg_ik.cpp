#include "t2mx/core/leg_ik.hpp"

#include <algorithm>
#include <cmath>

#include "t2mx/core/error.hpp"
#include "t2mx/core/rotation.hpp"

namespace t2mx::core {

LegSolution solve_leg(const Eigen::Vector3d& hip, const Eigen::Vector3d& knee_hint,
                      const Eigen::Vector3d& ankle_target,
                      const std::optional<Eigen::Vector3d>& foot_target,
                      const Eigen::Matrix3d& parent_global, const LegChain& chain) {
  const double l1 = chain.thigh;
  const double l2 = chain.shin;
  require(l1 > 1e-9 && l2 > 1e-9, ErrorCode::kContract, "leg bones must have nonzero length");
  LegSolution out;

  Eigen::Vector3d d = ankle_target - hip;
  double dist = d.norm();
  const Eigen::Vector3d down = -(parent_global * Eigen::Vector3d::UnitY());
  const Eigen::Vector3d dir = dist > 1e-9 ? Eigen::Vector3d(d / dist) : down;
  const double max_reach = l1 + l2;
  const double min_reach = std::abs(l1 - l2) + 1e-6;
  if (dist > max_reach) {
    dist = max_reach;
    out.reach_clamped = true;
  } else if (dist < min_reach) {
    dist = min_reach;
    out.reach_clamped = true;
  }
  const Eigen::Vector3d ankle = hip + dist * dir;

  // Hinge axis: normal of the plane (hip, knee hint, target), else the parent's x axis.
  Eigen::Vector3d hinge = (knee_hint - hip).cross(ankle_target - knee_hint);
  hinge -= hinge.dot(dir) * dir;
  if (hinge.norm() < 1e-6 * l1 * l2) {
    hinge = parent_global * Eigen::Vector3d::UnitX();
    hinge -= hinge.dot(dir) * dir;
    if (hinge.norm() < 1e-9) {
      hinge = parent_global * Eigen::Vector3d::UnitZ();
      hinge -= hinge.dot(dir) * dir;
    }
  }
  hinge.normalize();

  const double cos_upper = std::clamp((l1 * l1 + dist * dist - l2 * l2) / (2.0 * l1 * dist), -1.0, 1.0);
  const double sin_upper = std::sqrt(std::max(0.0, 1.0 - cos_upper * cos_upper));
  const Eigen::Vector3d side = dir.cross(hinge).normalized();
  const Eigen::Vector3d thigh_dir = cos_upper * dir + sin_upper * side;
  out.knee = hip + l1 * thigh_dir;
  out.ankle = ankle;
  const Eigen::Vector3d shin_dir = (ankle - out.knee).normalized();

  Eigen::Matrix3d hip_global;
  hip_global.col(0) = hinge;
  hip_global.col(1) = -thigh_dir;
  hip_global.col(2) = hinge.cross(-thigh_dir);
  out.hip_local = parent_global.transpose() * hip_global;

  const double flex = std::atan2(thigh_dir.cross(shin_dir).dot(hinge), thigh_dir.dot(shin_dir));
  out.knee_local = axis_angle(Eigen::Vector3d::UnitX(), flex);

  if (foot_target) {
    const Eigen::Matrix3d knee_global = hip_global * out.knee_local;
    const Eigen::Vector3d want = knee_global.transpose() * (*foot_target - ankle);
    if (want.norm() > 1e-9) out.ankle_local = rotation_between(chain.foot_offset, want);
  }
  return out;
}

}  // namespace t2mx::core
