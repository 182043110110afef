#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "t2mx/prep/filter.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "test_util.hpp"

namespace t2mx::prep {
namespace {

using core::FrameMatrix;
using t2mx::testing::error_code_of;

FrameMatrix sine(int frames, double fps, double hz, int cols = 1, double phase = 0.0) {
  FrameMatrix m(frames, cols);
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < cols; ++c) m(t, c) = static_cast<float>(std::sin(2 * M_PI * hz * t / fps + phase + c));
  }
  return m;
}

// Direct O(T²) DFT ratio used as the reference for the FFT-based score.
double reference_ratio(const FrameMatrix& m, int col, double fps, double cutoff) {
  const int n = static_cast<int>(m.rows());
  double mean = 0.0;
  for (int t = 0; t < n; ++t) mean += m(t, col);
  mean /= n;
  double total = 0.0;
  double high = 0.0;
  for (int k = 1; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (int t = 0; t < n; ++t) acc += (m(t, col) - mean) * std::polar(1.0, -2 * M_PI * k * t / n);
    const double f = std::min(k, n - k) * fps / n;
    total += std::norm(acc);
    if (f > cutoff) high += std::norm(acc);
  }
  return high / total;
}

TEST(Jitter, ConstantIsZero) {
  EXPECT_EQ(jitter_score(FrameMatrix::Constant(30, 4, 3.0f), 30.0, 6.0), 0.0);
}

TEST(Jitter, AlternatingIsOne) {
  FrameMatrix m(30, 1);
  for (int t = 0; t < 30; ++t) m(t, 0) = t % 2 == 0 ? 1.0f : -1.0f;
  EXPECT_NEAR(jitter_score(m, 30.0, 6.0), 1.0, 1e-12);
}

TEST(Jitter, LowSineIsNearZero) {
  EXPECT_LT(jitter_score(sine(60, 30.0, 2.0), 30.0, 6.0), 0.01);
}

TEST(Jitter, MatchesDirectDft) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  FrameMatrix m = sine(50, 30.0, 1.5, 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += static_cast<float>(0.3 * n(rng));
  const auto per = jitter_per_channel(m, 30.0, 6.0);
  double mean = 0.0;
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(per[c], reference_ratio(m, c, 30.0, 6.0), 1e-9);
    mean += per[c] / 3.0;
  }
  EXPECT_NEAR(jitter_score(m, 30.0, 6.0), mean, 1e-12);
}

TEST(Jitter, InvalidArguments) {
  const FrameMatrix m = sine(30, 30.0, 2.0);
  EXPECT_EQ(error_code_of([&] { jitter_score(m, 30.0, 15.0); }), ErrorCode::kInvalidCutoff);
  EXPECT_EQ(error_code_of([&] { jitter_score(m, 30.0, 0.0); }), ErrorCode::kInvalidCutoff);
  EXPECT_EQ(error_code_of([&] { smooth_motion(m, 30.0, -1.0); }), ErrorCode::kInvalidCutoff);
  EXPECT_EQ(error_code_of([] { jitter_score(FrameMatrix::Zero(7, 1), 30.0, 6.0); }), ErrorCode::kTooShort);
}

TEST(Smooth, ConstantPasses) {
  const FrameMatrix m = FrameMatrix::Constant(20, 2, -1.5f);
  EXPECT_LT((smooth_motion(m, 30.0, 6.0) - m).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Smooth, PassbandSineAwayFromEdges) {
  const FrameMatrix m = sine(90, 30.0, 2.0);
  const FrameMatrix y = smooth_motion(m, 30.0, 6.0);
  ASSERT_EQ(y.rows(), 90);
  for (int t = 3; t < 87; ++t) EXPECT_LT(std::abs(y(t, 0) - m(t, 0)), 0.05) << t;
}

TEST(Smooth, MatchesButterworthMagnitude) {
  // Zero-phase filtering applies |H|² of the second-order Butterworth.
  const double fps = 30.0;
  const double fc = 6.0;
  const int n = 300;
  for (double hz : {3.0, 8.0, 10.0}) {
    const FrameMatrix y = smooth_motion(sine(n, fps, hz), fps, fc);
    const double wa = std::tan(M_PI * hz / fps) / std::tan(M_PI * fc / fps);
    const double gain = 1.0 / (1.0 + std::pow(wa, 4));
    // Amplitude by least squares on sin/cos over the interior.
    double ss = 0.0, sc = 0.0, cc = 0.0, ys = 0.0, yc = 0.0;
    for (int t = 60; t < n - 60; ++t) {
      const double s = std::sin(2 * M_PI * hz * t / fps);
      const double c = std::cos(2 * M_PI * hz * t / fps);
      ss += s * s;
      sc += s * c;
      cc += c * c;
      ys += y(t, 0) * s;
      yc += y(t, 0) * c;
    }
    const double det = ss * cc - sc * sc;
    const double a = (ys * cc - yc * sc) / det;
    const double b = (yc * ss - ys * sc) / det;
    EXPECT_NEAR(std::hypot(a, b), gain, 0.01) << hz;
  }
}

TEST(Smooth, PreservesMeanAndIsNearlyIdempotent) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  FrameMatrix m(64, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(n(rng));
  // Periodic-ish low-frequency content plus noise.
  m += sine(64, 30.0, 1.0, 5);
  const FrameMatrix once = smooth_motion(m, 30.0, 6.0);
  const FrameMatrix twice = smooth_motion(once, 30.0, 6.0);
  EXPECT_LE(jitter_score(twice, 30.0, 6.0), jitter_score(once, 30.0, 6.0) + 1e-6);

  // DC gain 1: a constant offset is carried through unchanged.
  const FrameMatrix shifted = smooth_motion((m.array() + 2.0f).matrix(), 30.0, 6.0);
  EXPECT_LT(((shifted - once).array() - 2.0f).abs().maxCoeff(), 1e-4);
}

TEST(Smooth, JitteredClipScoreDropsByFourTimes) {
  Composition c;
  c.body = "walk";
  c.hand = "wave";
  c.face = "talk";
  const auto m = synthesize(c, {1.0, 0.8}, 90, 30.0);
  const core::MotionClip clean("j", 30.0, m.body, m.hand, m.face, {"x"});
  const core::MotionClip noisy = inject_jitter(clean, 0.01, 17);
  JitterReport report;
  const core::MotionClip out = smooth_clip(noisy, 6.0, {}, &report);
  EXPECT_GT(report.jitter_before, 0.0);
  EXPECT_LT(report.jitter_after, 0.25 * report.jitter_before);
  EXPECT_EQ(report.per_channel_before.size(), 256u + 180u + 56u);
  const auto j = report_to_json(report);
  for (const char* key : {"clip_id", "jitter_before", "jitter_after", "cutoff_hz"}) EXPECT_TRUE(j.contains(key));
  // Contacts are re-derived binary values and rotations stay proper.
  const auto& body = out.body();
  for (int t = 0; t < out.frames(); ++t) {
    for (int k = 0; k < 4; ++k) {
      const float v = body(t, core::layout::kContacts + k);
      EXPECT_TRUE(v == 0.0f || v == 1.0f);
    }
  }
  core::Vector6d v;
  for (int k = 0; k < 6; ++k) v[k] = body(10, core::layout::body_rot(3) + k);
  EXPECT_LT((core::orthonormalize_rot6d(v) - v).norm(), 1e-5);
}

}  // namespace
}  // namespace t2mx::prep
