#include <random>

#include <gtest/gtest.h>

#include "t2mx/core/kinematics.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/core/rotation.hpp"
#include "t2mx/infer/visual.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "test_util.hpp"

namespace t2mx::infer {
namespace {

using core::Skeleton;

core::FrameMatrix walk_body(int frames) {
  prep::Composition c;
  c.body = "walk";
  return prep::synthesize(c, {}, frames, 30.0).body;
}

double max_error(const core::JointFrame& a, const core::JointFrame& b, bool legs_only) {
  double e = 0.0;
  for (int j = 0; j < core::kBodyJoints; ++j) {
    if (legs_only && !core::is_leg_joint(j) && j != core::kLeftFoot && j != core::kRightFoot) continue;
    e = std::max(e, (a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]).norm());
  }
  return e;
}

TEST(LegRecovery, StraightLegIsRest) {
  const Skeleton& sk = Skeleton::canonical();
  core::RotationFrame rest;
  rest.fill(Eigen::Matrix3d::Identity());
  const core::FkResult fk = core::forward_kinematics(rest, sk.pelvis_rest.y(), sk);
  const LegRecovery r = recover_leg_rotations({fk.positions}, sk);
  ASSERT_EQ(r.rotations.size(), 1u);
  for (const auto& m : r.rotations[0]) EXPECT_LT((m - Eigen::Matrix3d::Identity()).norm(), 1e-6);
  EXPECT_EQ(r.clamped_frames, 0);
}

TEST(LegRecovery, FkRoundTripOnWalkFrames) {
  const core::FrameMatrix body = walk_body(120);
  const core::JointSequence pos = core::local_positions(body);
  const LegRecovery r = recover_leg_rotations(pos);
  for (std::size_t t = 0; t < pos.size(); ++t) {
    core::RotationFrame local = core::local_rotations(body, static_cast<int>(t));
    for (std::size_t k = 0; k < core::kLegJoints.size(); ++k) {
      local[static_cast<std::size_t>(core::kLegJoints[k])] = r.rotations[t][k];
    }
    const core::FkResult fk = core::forward_kinematics(local, body(static_cast<int>(t), 3));
    EXPECT_LT(max_error(fk.positions, pos[t], true), 1e-3) << "frame " << t;
  }
}

TEST(LegRecovery, UnreachableAnkleIsClampedAndFlagged) {
  const Skeleton& sk = Skeleton::canonical();
  core::RotationFrame rest;
  rest.fill(Eigen::Matrix3d::Identity());
  core::JointFrame p = core::forward_kinematics(rest, sk.pelvis_rest.y(), sk).positions;
  p[core::kLeftAnkle] += Eigen::Vector3d(0.0, -0.5, 0.0);
  p[core::kLeftFoot] += Eigen::Vector3d(0.0, -0.5, 0.0);
  const LegRecovery r = recover_leg_rotations({p}, sk);
  EXPECT_TRUE(r.clamped[0]);
  EXPECT_EQ(r.clamped_frames, 1);
}

TEST(ComposeVisualPose, ConsistentInputMatchesRotationAnimation) {
  const core::FrameMatrix body = walk_body(90);
  const VisualPose v = compose_visual_pose(body);
  const core::JointSequence world = core::world_positions(body);
  ASSERT_EQ(v.world.size(), world.size());
  for (std::size_t t = 0; t < world.size(); ++t) EXPECT_LT(max_error(v.world[t], world[t], false), 1e-3) << t;
}

TEST(ComposeVisualPose, PositionNoiseStaysInTheLegs) {
  const core::FrameMatrix body = walk_body(60);
  core::FrameMatrix noisy = body;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> n(0.0f, 0.02f);
  for (int t = 0; t < noisy.rows(); ++t) {
    for (int k = 0; k < 3 * core::kBodyJoints; ++k) noisy(t, core::layout::kBodyPos + k) += n(rng);
  }
  const VisualPose clean = compose_visual_pose(body);
  const VisualPose v = compose_visual_pose(noisy);
  const core::JointSequence rot_only = [&] {
    core::JointSequence out;
    for (int t = 0; t < body.rows(); ++t) out.push_back(core::forward_kinematics(core::local_rotations(body, t), body(t, 3)).positions);
    return out;
  }();
  for (std::size_t t = 0; t < v.local.size(); ++t) {
    const core::FkResult fk = core::forward_kinematics(v.local[t], body(static_cast<int>(t), 3));
    for (int j = 0; j < core::kBodyJoints; ++j) {
      if (core::is_leg_joint(j) || j == core::kLeftFoot || j == core::kRightFoot) continue;
      EXPECT_TRUE(v.local[t][static_cast<std::size_t>(j)] == clean.local[t][static_cast<std::size_t>(j)]);
      EXPECT_EQ(fk.positions[static_cast<std::size_t>(j)], rot_only[t][static_cast<std::size_t>(j)]);
    }
  }
}

TEST(ComposeVisualPose, ZeroRootVelocityKeepsRootFixed) {
  core::FrameMatrix body = walk_body(30);
  body.col(0).setZero();
  body.col(1).setZero();
  body.col(2).setZero();
  const VisualPose v = compose_visual_pose(body);
  for (const auto& p : v.root.position) {
    EXPECT_EQ(p.x(), 0.0);
    EXPECT_EQ(p.z(), 0.0);
  }
  for (double h : v.root.heading) EXPECT_EQ(h, 0.0);
}

TEST(PositionsJson, Layout) {
  const VisualPose v = compose_visual_pose(walk_body(10));
  const nlohmann::json j = positions_to_json(v, 30.0);
  EXPECT_EQ(j["frames"].size(), 10u);
  EXPECT_EQ(j["frames"][0].size(), 21u);
  EXPECT_EQ(j["joints"].size(), 21u);
}

}  // namespace
}  // namespace t2mx::infer
