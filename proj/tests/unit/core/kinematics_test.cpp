#include <random>

#include <gtest/gtest.h>

#include "t2mx/core/kinematics.hpp"
#include "t2mx/core/leg_ik.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "test_util.hpp"

namespace t2mx::core {
namespace {

using t2mx::testing::error_code_of;

JointSequence constant_feet(int frames, const Eigen::Vector3d& step) {
  JointSequence seq(frames);
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < kBodyJoints; ++j) seq[t][j] = Eigen::Vector3d(0.1 * j, 0.5, 0.0) + step * t;
  }
  return seq;
}

TEST(FootContacts, StaticFeetAreAllOnes) {
  const Eigen::MatrixXf c = derive_foot_contacts(constant_feet(10, Eigen::Vector3d::Zero()), 30.0);
  ASSERT_EQ(c.rows(), 10);
  ASSERT_EQ(c.cols(), 4);
  EXPECT_EQ(c.minCoeff(), 1.0f);
}

TEST(FootContacts, FastFeetAreAllZeros) {
  const Eigen::MatrixXf c = derive_foot_contacts(constant_feet(10, Eigen::Vector3d(0.1, 0, 0)), 30.0);
  EXPECT_EQ(c.maxCoeff(), 0.0f);
}

TEST(FootContacts, TooShort) {
  EXPECT_EQ(error_code_of([] { derive_foot_contacts(constant_feet(1, Eigen::Vector3d::Zero()), 30.0); }),
            ErrorCode::kTooShort);
}

TEST(FootContacts, MatchSyntheticStanceLabels) {
  prep::Composition walk;
  walk.body = "walk";
  for (double tempo : {0.8, 1.0, 1.2}) {
    const auto m = prep::synthesize(walk, {tempo, 0.8}, 150, 30.0);
    const JointSequence world = world_positions(m.body);
    const Eigen::MatrixXf c = derive_foot_contacts(world, 30.0);
    int agree = 0;
    int total = 0;
    for (int t = 0; t < c.rows(); ++t) {
      for (int foot = 0; foot < 2; ++foot) {
        for (int k = 0; k < 2; ++k) {
          agree += (c(t, 2 * foot + k) > 0.5f) == (m.stance(t, foot) == 1);
          ++total;
        }
      }
    }
    EXPECT_GE(static_cast<double>(agree) / total, 0.95) << "tempo " << tempo;
  }
}

TEST(Kinematics, RootRoundTrip) {
  RootTrajectory root;
  for (int t = 0; t < 30; ++t) {
    root.heading.push_back(0.05 * t);
    root.position.emplace_back(0.3 * std::sin(0.1 * t), 0.9 + 0.01 * t, 0.02 * t * t);
  }
  root.heading[0] = 0.0;
  root.position[0] = Eigen::Vector3d(0.0, 0.9, 0.0);
  FrameMatrix body = FrameMatrix::Zero(30, layout::kBodyWidth);
  encode_root(root, body);
  const RootTrajectory back = integrate_root(body);
  for (int t = 0; t < 30; ++t) {
    EXPECT_NEAR(back.heading[t], root.heading[t], 1e-5);
    EXPECT_LT((back.position[t] - root.position[t]).norm(), 1e-4);
  }
}

TEST(Kinematics, RestPoseFk) {
  RotationFrame rest;
  for (auto& r : rest) r = Eigen::Matrix3d::Identity();
  const Skeleton& sk = Skeleton::canonical();
  const FkResult fk = forward_kinematics(rest, sk.pelvis_rest.y());
  EXPECT_NEAR(fk.positions[kLeftFoot].y(), 0.0, 1e-9);
  EXPECT_NEAR(fk.positions[kLeftAnkle].x(), 0.09, 1e-9);
  EXPECT_NEAR(fk.positions[kRightWrist].x(), -(0.07 + 0.11 + 0.26 + 0.25), 1e-9);
}

TEST(LegIk, ReachesTargetsAndKeepsBendSide) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const LegChain chain;
  const Skeleton& sk = Skeleton::canonical();
  int tested = 0;
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d hip(0.09, 0.85, 0.0);
    const Eigen::Vector3d target = hip + Eigen::Vector3d(0.3 * u(rng), -0.45 + 0.3 * u(rng), 0.35 * u(rng));
    const double d = (target - hip).norm();
    if (d > 0.81 || d < 0.1) continue;
    ++tested;
    const Eigen::Vector3d hint = 0.5 * (hip + target) + Eigen::Vector3d(0, 0, 0.3);
    const LegSolution s = solve_leg(hip, hint, target, std::nullopt, Eigen::Matrix3d::Identity(), chain);
    EXPECT_FALSE(s.reach_clamped);
    // Forward kinematics of the solved chain, independent of the solver internals.
    const Eigen::Matrix3d g_hip = s.hip_local;
    const Eigen::Vector3d knee = hip + g_hip * sk.offsets[kLeftKnee];
    const Eigen::Vector3d ankle = knee + g_hip * s.knee_local * sk.offsets[kLeftAnkle];
    EXPECT_LT((ankle - target).norm(), 1e-9);
    EXPECT_GT((knee - 0.5 * (hip + target)).z(), -1e-9);
  }
  EXPECT_GT(tested, 100);
}

TEST(LegIk, UnreachableTargetIsClampedAndFlagged) {
  const LegChain chain;
  const Eigen::Vector3d hip(0.09, 0.85, 0.0);
  const LegSolution s = solve_leg(hip, hip, hip + Eigen::Vector3d(0, -2.0, 0), std::nullopt,
                                  Eigen::Matrix3d::Identity(), chain);
  EXPECT_TRUE(s.reach_clamped);
  EXPECT_NEAR((s.ankle - hip).norm(), 0.82, 1e-9);
}

TEST(TemporalVelocity, Properties) {
  FrameMatrix constant = FrameMatrix::Constant(5, 3, 2.0f);
  EXPECT_EQ(temporal_velocity(constant).cwiseAbs().maxCoeff(), 0.0f);
  FrameMatrix ramp(6, 3);
  const Eigen::RowVector3f unit(0.6f, 0.0f, 0.8f);
  for (int t = 0; t < 6; ++t) ramp.row(t) = static_cast<float>(t) * unit;
  const FrameMatrix v = temporal_velocity(ramp);
  ASSERT_EQ(v.rows(), 5);
  for (int t = 0; t < 5; ++t) EXPECT_LT((v.row(t) - unit).norm(), 1e-6);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  FrameMatrix m(40, 7);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  const Eigen::RowVectorXf sum = temporal_velocity(m).colwise().sum();
  EXPECT_LT((sum - (m.row(39) - m.row(0))).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_EQ(error_code_of([] { temporal_velocity(FrameMatrix(1, 3)); }), ErrorCode::kTooShort);
}

}  // namespace
}  // namespace t2mx::core
