#pragma once

#include <optional>

#include <Eigen/Core>

namespace t2mx::core {

/// Analytic two-bone solve for one leg whose rest thigh and shin point along
/// −y of the hip frame and whose knee hinges about local +x.
struct LegChain {
  double thigh = 0.40;  // hip -> knee
  double shin = 0.42;   // knee -> ankle
  Eigen::Vector3d foot_offset{0.0, -0.06, 0.13};  // ankle -> foot (toe), ankle frame
};

struct LegSolution {
  Eigen::Matrix3d hip_local = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d knee_local = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d ankle_local = Eigen::Matrix3d::Identity();
  Eigen::Vector3d knee = Eigen::Vector3d::Zero();   // solved knee position
  Eigen::Vector3d ankle = Eigen::Vector3d::Zero();  // solved (possibly clamped) ankle position
  bool reach_clamped = false;
};

/// Solves hip/knee/ankle local rotations so that the chain rooted at `hip`
/// reaches `ankle_target`. The knee bend plane comes from `knee_hint`
/// (the knee position, or any point on the bend side); when hip, hint and
/// target are collinear the hinge falls back to the parent's x axis.
/// Unreachable targets are pulled onto the reachable shell and flagged.
/// The ankle takes the minimal-arc rotation aiming the foot at `foot_target`
/// when given, identity otherwise.
LegSolution solve_leg(const Eigen::Vector3d& hip, const Eigen::Vector3d& knee_hint,
                      const Eigen::Vector3d& ankle_target,
                      const std::optional<Eigen::Vector3d>& foot_target,
                      const Eigen::Matrix3d& parent_global, const LegChain& chain);

}  // namespace t2mx::core
