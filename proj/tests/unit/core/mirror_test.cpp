#include <random>

#include <gtest/gtest.h>

#include "t2mx/core/mirror.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "test_util.hpp"

namespace t2mx::core {
namespace {

// Signed channel permutation built straight from the skeleton tables:
// out[dst[c]] = sign[c] * in[c].
struct SignedPermutation {
  std::vector<int> dst;
  std::vector<float> sign;

  FrameMatrix apply(const FrameMatrix& in) const {
    FrameMatrix out(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c) out.col(dst[c]) = sign[c] * in.col(c);
    return out;
  }
};

// Reflecting R by S = diag(-1,1,1) gives S R S; on the first two columns that is
// (-S r0, S r1), i.e. signs (+,-,-) then (-,+,+).
constexpr std::array<float, 6> kRot6Signs = {1, -1, -1, -1, 1, 1};

SignedPermutation body_oracle(const Skeleton& sk) {
  SignedPermutation p;
  p.dst.resize(layout::kBodyWidth);
  p.sign.assign(layout::kBodyWidth, 1.0f);
  const std::array<float, 4> root_sign = {-1, -1, 1, 1};
  for (int k = 0; k < 4; ++k) {
    p.dst[k] = k;
    p.sign[k] = root_sign[k];
  }
  for (int j = 0; j < kBodyJoints; ++j) {
    const int m = sk.mirror_map[j];
    for (int k = 0; k < 3; ++k) {
      p.dst[layout::body_pos(j) + k] = layout::body_pos(m) + k;
      p.dst[layout::body_vel(j) + k] = layout::body_vel(m) + k;
      p.sign[layout::body_pos(j) + k] = k == 0 ? -1.0f : 1.0f;
      p.sign[layout::body_vel(j) + k] = k == 0 ? -1.0f : 1.0f;
    }
    for (int k = 0; k < 6; ++k) {
      p.dst[layout::body_rot(j) + k] = layout::body_rot(m) + k;
      p.sign[layout::body_rot(j) + k] = kRot6Signs[k];
    }
  }
  const std::array<int, 4> contact_swap = {2, 3, 0, 1};
  for (int k = 0; k < 4; ++k) p.dst[layout::kContacts + k] = layout::kContacts + contact_swap[k];
  return p;
}

SignedPermutation hand_oracle(const Skeleton& sk) {
  SignedPermutation p;
  p.dst.resize(layout::kHandWidth);
  p.sign.resize(layout::kHandWidth);
  for (int j = 0; j < kHandJoints; ++j) {
    for (int k = 0; k < 6; ++k) {
      p.dst[layout::hand_rot(j) + k] = layout::hand_rot(sk.hand_mirror_map[j]) + k;
      p.sign[layout::hand_rot(j) + k] = kRot6Signs[k];
    }
  }
  return p;
}

TEST(Mirror, MatchesSignedPermutationOracle) {
  std::mt19937_64 rng(5);
  const MotionClip clip = t2mx::testing::random_clip("c", 12, rng);
  const MotionClip m = mirror_clip(clip);
  const Skeleton& sk = Skeleton::canonical();
  EXPECT_LT((m.body() - body_oracle(sk).apply(clip.body())).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((*m.hand() - hand_oracle(sk).apply(*clip.hand())).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(*m.face(), *clip.face());
}

TEST(Mirror, IsAnInvolution) {
  std::mt19937_64 rng(6);
  const MotionClip clip = t2mx::testing::random_clip("c", 20, rng);
  const MotionClip twice = mirror_clip(mirror_clip(clip));
  EXPECT_LT((twice.body() - clip.body()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((*twice.hand() - *clip.hand()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((*twice.face() - *clip.face()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Mirror, SymmetricStandingPoseIsFixed) {
  FrameMatrix body(3, layout::kBodyWidth);
  FrameMatrix hand(3, layout::kHandWidth);
  for (int t = 0; t < 3; ++t) {
    WholeBodyPose p = WholeBodyPose::identity();
    p.root = {0.0, 0.0, 0.01, 0.96};
    const auto& sk = Skeleton::canonical();
    for (int j = 0; j < kBodyJoints; ++j) p.body_pos[j] = sk.offsets[j] * (j + 1) * 0.1;
    for (int j = 0; j < kBodyJoints; ++j) {
      // Symmetric positions: mirrored pairs share |x|, midline joints have x = 0.
      if (sk.mirror_map[j] == j) p.body_pos[j].x() = 0.0;
    }
    for (int j = 0; j < kBodyJoints; ++j) {
      const int m = sk.mirror_map[j];
      if (m > j) {
        p.body_pos[m] = p.body_pos[j];
        p.body_pos[m].x() = -p.body_pos[j].x();
      }
    }
    p.foot_contacts = {1, 1, 1, 1};
    p.body_to({body.row(t).data(), static_cast<std::size_t>(layout::kBodyWidth)});
    p.hand_to({hand.row(t).data(), static_cast<std::size_t>(layout::kHandWidth)});
  }
  const MotionClip clip("sym", 30.0, body, hand, std::nullopt, {"stands"});
  const MotionClip m = mirror_clip(clip);
  EXPECT_LT((m.body() - clip.body()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((*m.hand() - *clip.hand()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Mirror, CommutesWithTemporalVelocity) {
  std::mt19937_64 rng(9);
  const MotionClip clip = t2mx::testing::random_clip("c", 16, rng);
  const MotionClip mirrored = mirror_clip(clip);
  const FrameMatrix a = temporal_velocity(mirrored.body());
  const FrameMatrix dv = temporal_velocity(clip.body());
  const FrameMatrix b = body_oracle(Skeleton::canonical()).apply(dv);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-5);
}

// Per-joint rotation angles of one hand side.
std::vector<double> hand_angles(const FrameMatrix& hand, int t, int side) {
  std::vector<double> out;
  for (int j = 0; j < kHandJointsPerSide; ++j) {
    Vector6d v;
    for (int k = 0; k < 6; ++k) v[k] = hand(t, layout::hand_rot(side * kHandJointsPerSide + j) + k);
    out.push_back(rotation_angle(matrix_from_rot6d(v)));
  }
  return out;
}

TEST(Mirror, LeftFingerCurlBecomesRightFingerCurl) {
  prep::Composition left;
  left.hand = "finger-curl";
  left.hand_side = prep::Side::kLeft;
  prep::Composition right = left;
  right.hand_side = prep::Side::kRight;
  const prep::MotionStyle style{1.0, 1.0};
  const auto l = prep::synthesize(left, style, 40, 30.0);
  const auto r = prep::synthesize(right, style, 40, 30.0);
  const MotionClip clip("l", 30.0, l.body, l.hand, std::nullopt, {"x"});
  const MotionClip m = mirror_clip(clip);
  // Channel-level comparison with the independently synthesized right-hand curl.
  EXPECT_LT((*m.hand() - r.hand).cwiseAbs().maxCoeff(), 1e-5);
  for (int t = 0; t < 40; t += 5) {
    const auto before_left = hand_angles(*clip.hand(), t, 0);
    const auto before_right = hand_angles(*clip.hand(), t, 1);
    const auto after_left = hand_angles(*m.hand(), t, 0);
    const auto after_right = hand_angles(*m.hand(), t, 1);
    for (int j = 0; j < kHandJointsPerSide; ++j) {
      EXPECT_NEAR(after_right[j], before_left[j], 1e-5);
      EXPECT_NEAR(after_left[j], before_right[j], 1e-5);
    }
  }
}

TEST(Mirror, TextSwapsSides) {
  EXPECT_EQ(mirror_text("waves the left hand, Right foot forward"),
            "waves the right hand, Left foot forward");
  EXPECT_EQ(mirror_text("leftover rights"), "leftover rights");
}

}  // namespace
}  // namespace t2mx::core
