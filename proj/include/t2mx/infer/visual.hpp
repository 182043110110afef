#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "t2mx/core/kinematics.hpp"
#include "t2mx/core/skeleton.hpp"

namespace t2mx::infer {

/// Local rotations of the leg joints per frame, in core::kLegJoints order.
struct LegRecovery {
  std::vector<std::array<Eigen::Matrix3d, 6>> rotations;
  std::vector<bool> clamped;  // some leg needed a reach clamp in this frame
  int clamped_frames = 0;
};

/// Two-bone IK per leg on root-frame joint positions (pelvis orientation is
/// identity in that frame). The knee position sets the bend plane and the foot
/// joint aims the ankle. Throws kContract for zero-length leg bones.
LegRecovery recover_leg_rotations(const core::JointSequence& positions,
                                  const core::Skeleton& skeleton = core::Skeleton::canonical());

struct VisualPose {
  std::vector<core::RotationFrame> local;  // upper body predicted, legs recovered
  core::RootTrajectory root;
  core::JointSequence world;  // forward kinematics of `local` placed on the root path
  int clamped_frames = 0;
};

/// Hybrid pose for display: predicted 6D rotations drive the upper body, leg
/// rotations are recovered from the predicted positions, and the root path is
/// integrated from the root velocity channels.
VisualPose compose_visual_pose(const core::FrameMatrix& body,
                               const core::Skeleton& skeleton = core::Skeleton::canonical());

/// {"fps", "joints": [names], "frames": [[[x, y, z] x 21] x T]} of world positions.
nlohmann::json positions_to_json(const VisualPose& pose, double fps,
                                 const core::Skeleton& skeleton = core::Skeleton::canonical());

}  // namespace t2mx::infer
