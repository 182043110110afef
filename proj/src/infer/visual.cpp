#include "t2mx/infer/visual.hpp"

#include "t2mx/core/leg_ik.hpp"
#include "t2mx/core/rotation.hpp"

namespace t2mx::infer {

using core::BodyJoint;

LegRecovery recover_leg_rotations(const core::JointSequence& positions, const core::Skeleton& skeleton) {
  LegRecovery out;
  out.rotations.resize(positions.size());
  out.clamped.assign(positions.size(), false);
  const BodyJoint hips[2] = {core::kLeftHip, core::kRightHip};
  const BodyJoint knees[2] = {core::kLeftKnee, core::kRightKnee};
  const BodyJoint ankles[2] = {core::kLeftAnkle, core::kRightAnkle};
  const BodyJoint feet[2] = {core::kLeftFoot, core::kRightFoot};
  std::array<core::LegChain, 2> chains;
  for (int s = 0; s < 2; ++s) {
    chains[s].thigh = skeleton.bone_length(knees[s]);
    chains[s].shin = skeleton.bone_length(ankles[s]);
    chains[s].foot_offset = skeleton.offsets[feet[s]];
  }
  for (std::size_t t = 0; t < positions.size(); ++t) {
    const core::JointFrame& p = positions[t];
    for (int s = 0; s < 2; ++s) {
      const core::LegSolution leg = core::solve_leg(p[hips[s]], p[knees[s]], p[ankles[s]], p[feet[s]],
                                                    Eigen::Matrix3d::Identity(), chains[s]);
      out.rotations[t][static_cast<std::size_t>(s)] = leg.hip_local;
      out.rotations[t][static_cast<std::size_t>(2 + s)] = leg.knee_local;
      out.rotations[t][static_cast<std::size_t>(4 + s)] = leg.ankle_local;
      if (leg.reach_clamped) out.clamped[t] = true;
    }
    out.clamped_frames += out.clamped[t];
  }
  return out;
}

VisualPose compose_visual_pose(const core::FrameMatrix& body, const core::Skeleton& skeleton) {
  VisualPose out;
  out.root = core::integrate_root(body);
  const LegRecovery legs = recover_leg_rotations(core::local_positions(body), skeleton);
  out.clamped_frames = legs.clamped_frames;
  const int frames = static_cast<int>(body.rows());
  out.local.resize(static_cast<std::size_t>(frames));
  out.world.resize(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    core::RotationFrame& local = out.local[static_cast<std::size_t>(t)];
    local = core::local_rotations(body, t);
    for (std::size_t k = 0; k < core::kLegJoints.size(); ++k) {
      local[static_cast<std::size_t>(core::kLegJoints[k])] = legs.rotations[static_cast<std::size_t>(t)][k];
    }
    const Eigen::Vector3d& root = out.root.position[static_cast<std::size_t>(t)];
    const core::FkResult fk = core::forward_kinematics(local, root.y(), skeleton);
    const Eigen::Matrix3d heading = core::heading_rotation(out.root.heading[static_cast<std::size_t>(t)]);
    const Eigen::Vector3d ground(root.x(), 0.0, root.z());
    for (int j = 0; j < core::kBodyJoints; ++j) {
      out.world[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = heading * fk.positions[static_cast<std::size_t>(j)] + ground;
    }
  }
  return out;
}

nlohmann::json positions_to_json(const VisualPose& pose, double fps, const core::Skeleton& skeleton) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : pose.world) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& p : f) row.push_back({p.x(), p.y(), p.z()});
    frames.push_back(std::move(row));
  }
  return {{"fps", fps},
          {"joints", std::vector<std::string>(skeleton.joint_names.begin(),
                                              skeleton.joint_names.begin() + core::kBodyJoints)},
          {"frames", frames}};
}

}  // namespace t2mx::infer
