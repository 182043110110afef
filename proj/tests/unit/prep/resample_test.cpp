#include <cmath>

#include <gtest/gtest.h>

#include "t2mx/prep/resample.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "test_util.hpp"

namespace t2mx::prep {
namespace {

using core::FrameMatrix;
using t2mx::testing::error_code_of;

TEST(Resample, HalvingARampTakesEveryOtherSample) {
  FrameMatrix m(21, 2);
  for (int t = 0; t < 21; ++t) {
    m(t, 0) = static_cast<float>(t);
    m(t, 1) = static_cast<float>(-3 * t);
  }
  const FrameMatrix y = resample_matrix(m, 60.0, 30.0);
  ASSERT_EQ(y.rows(), 11);
  for (int k = 0; k < 11; ++k) {
    EXPECT_EQ(y(k, 0), m(2 * k, 0));
    EXPECT_EQ(y(k, 1), m(2 * k, 1));
  }
}

TEST(Resample, SameRateIsIdentity) {
  Composition c;
  c.body = "walk";
  const auto s = synthesize(c, {}, 30, 30.0);
  const core::MotionClip clip("a", 30.0, s.body, s.hand, s.face, {"x"});
  const core::MotionClip out = resample(clip, 30.0);
  EXPECT_EQ(out.body(), clip.body());
  EXPECT_EQ(*out.hand(), *clip.hand());
}

TEST(Resample, NinetyToThirtySine) {
  const int n = 271;
  FrameMatrix m(n, 1);
  for (int t = 0; t < n; ++t) m(t, 0) = static_cast<float>(std::sin(2 * M_PI * t / 90.0));
  const FrameMatrix y = resample_matrix(m, 90.0, 30.0);
  ASSERT_EQ(y.rows(), 91);
  for (int k = 0; k < y.rows(); ++k) EXPECT_LT(std::abs(y(k, 0) - std::sin(2 * M_PI * k / 30.0)), 1e-3);
}

TEST(Resample, FractionalRatioInterpolatesLinearly) {
  FrameMatrix m(26, 1);
  for (int t = 0; t < 26; ++t) m(t, 0) = static_cast<float>(0.5 * t);
  const FrameMatrix y = resample_matrix(m, 50.0, 30.0);
  for (int k = 0; k < y.rows(); ++k) EXPECT_NEAR(y(k, 0), 0.5 * k * 50.0 / 30.0, 1e-5);
}

TEST(Resample, UpsamplingIsUnsupported) {
  const FrameMatrix m = FrameMatrix::Zero(10, 1);
  EXPECT_EQ(error_code_of([&] { resample_matrix(m, 30.0, 60.0); }), ErrorCode::kUnsupported);
}

TEST(Resample, ClipKeepsDurationAndRecomputesDerivedChannels) {
  Composition c;
  c.body = "walk";
  c.hand = "wave";
  c.face = "smile";
  const auto s60 = synthesize(c, {1.0, 0.8}, 121, 60.0);
  const core::MotionClip clip("w", 60.0, s60.body, s60.hand, s60.face, {"x"});
  const core::MotionClip out = resample(clip, 30.0);
  EXPECT_EQ(out.fps(), 30.0);
  const double d_in = (clip.frames() - 1) / 60.0;
  const double d_out = (out.frames() - 1) / 30.0;
  EXPECT_LE(std::abs(d_in - d_out), 1.0 / 30.0);
  // Matches a direct 30 fps rendering of the same motion closely.
  const auto s30 = synthesize(c, {1.0, 0.8}, out.frames(), 30.0);
  EXPECT_LT((out.body() - s30.body).leftCols(core::layout::kContacts).cwiseAbs().maxCoeff(), 0.03);
  // Velocities of the output are the differences of its own positions.
  FrameMatrix body = out.body();
  core::recompute_velocities(body);
  EXPECT_LT((body - out.body()).cwiseAbs().maxCoeff(), 1e-6);
}

}  // namespace
}  // namespace t2mx::prep
