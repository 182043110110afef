#include "t2mx/prep/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "t2mx/core/error.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/core/rotation.hpp"

namespace t2mx::prep {

using namespace t2mx::core;

namespace {

constexpr int kMinFrames = 8;
constexpr int kMaxPad = 15;

void check_args(const FrameMatrix& m, double fps, double cutoff_hz) {
  require(m.rows() >= kMinFrames, ErrorCode::kTooShort,
          "need at least " + std::to_string(kMinFrames) + " frames, got " + std::to_string(m.rows()));
  require(fps > 0.0, ErrorCode::kInvalidCutoff, "fps must be positive");
  require(cutoff_hz > 0.0 && cutoff_hz < fps / 2.0, ErrorCode::kInvalidCutoff,
          "cutoff " + std::to_string(cutoff_hz) + " Hz outside (0, " + std::to_string(fps / 2.0) +
              ")");
}

// Returns the high-frequency ratio, or a negative value for a constant channel.
double channel_ratio(Eigen::FFT<double>& fft, std::vector<double>& x, double fps,
                     double cutoff_hz) {
  const int t = static_cast<int>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= t;
  double var = 0.0;
  for (double& v : x) {
    v -= mean;
    var += v * v;
  }
  if (var / t <= 1e-18) return -1.0;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, x);
  double total = 0.0;
  double high = 0.0;
  for (int k = 1; k < t; ++k) {
    const double power = std::norm(spectrum[k]);
    const double freq = static_cast<double>(std::min(k, t - k)) * fps / t;
    total += power;
    if (freq > cutoff_hz) high += power;
  }
  if (total <= 0.0) return -1.0;
  return std::clamp(high / total, 0.0, 1.0);
}

struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad butterworth2(double cutoff_hz, double fps) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / fps);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
  Biquad f;
  f.b0 = k2 * norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (k2 - 1.0) * norm;
  f.a2 = (1.0 - std::numbers::sqrt2 * k + k2) * norm;
  return f;
}

// Transposed direct form II, started in the steady state of a constant input x[0].
void run_filter(const Biquad& f, std::vector<double>& x) {
  const double zi1 = f.b1 - f.a1 + f.b2 - f.a2;
  const double zi2 = f.b2 - f.a2;
  double z1 = zi1 * x.front();
  double z2 = zi2 * x.front();
  for (double& v : x) {
    const double in = v;
    const double out = f.b0 * in + z1;
    z1 = f.b1 * in - f.a1 * out + z2;
    z2 = f.b2 * in - f.a2 * out;
    v = out;
  }
}

std::vector<double> filtfilt(const Biquad& f, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const int pad = std::min(n - 1, kMaxPad);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (int i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (int i = n - 2; i >= n - 1 - pad; --i) ext.push_back(2.0 * x[n - 1] - x[i]);
  run_filter(f, ext);
  std::reverse(ext.begin(), ext.end());
  run_filter(f, ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + pad, ext.begin() + pad + n);
}

void snap_block(FrameMatrix& m, Eigen::Index row, int col) {
  Vector6d v;
  for (int k = 0; k < 6; ++k) v[k] = m(row, col + k);
  Vector6d out;
  try {
    out = orthonormalize_rot6d(v);
  } catch (const Error&) {
    out = identity_rot6d();
  }
  for (int k = 0; k < 6; ++k) m(row, col + k) = static_cast<float>(out[k]);
}

}  // namespace

std::vector<double> jitter_per_channel(const FrameMatrix& m, double fps, double cutoff_hz) {
  check_args(m, fps, cutoff_hz);
  Eigen::FFT<double> fft;
  std::vector<double> out(m.cols(), 0.0);
  std::vector<double> x(m.rows());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index t = 0; t < m.rows(); ++t) x[t] = m(t, c);
    out[c] = std::max(0.0, channel_ratio(fft, x, fps, cutoff_hz));
  }
  return out;
}

double jitter_score(const FrameMatrix& m, double fps, double cutoff_hz) {
  check_args(m, fps, cutoff_hz);
  Eigen::FFT<double> fft;
  std::vector<double> x(m.rows());
  double sum = 0.0;
  int counted = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index t = 0; t < m.rows(); ++t) x[t] = m(t, c);
    const double r = channel_ratio(fft, x, fps, cutoff_hz);
    if (r < 0.0) continue;
    sum += r;
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

FrameMatrix smooth_motion(const FrameMatrix& m, double fps, double cutoff_hz) {
  check_args(m, fps, cutoff_hz);
  const Biquad f = butterworth2(cutoff_hz, fps);
  FrameMatrix out(m.rows(), m.cols());
  std::vector<double> x(m.rows());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index t = 0; t < m.rows(); ++t) x[t] = m(t, c);
    const std::vector<double> y = filtfilt(f, x);
    for (Eigen::Index t = 0; t < m.rows(); ++t) out(t, c) = static_cast<float>(y[t]);
  }
  return out;
}

nlohmann::json report_to_json(const JitterReport& r) {
  return {{"clip_id", r.clip_id},
          {"jitter_before", r.jitter_before},
          {"jitter_after", r.jitter_after},
          {"cutoff_hz", r.cutoff_hz}};
}

void reorthonormalize(Modality modality, FrameMatrix& channels) {
  for (Eigen::Index t = 0; t < channels.rows(); ++t) {
    switch (modality) {
      case Modality::kBody:
        for (int j = 0; j < kBodyJoints; ++j) snap_block(channels, t, layout::body_rot(j));
        break;
      case Modality::kHand:
        for (int j = 0; j < kHandJoints; ++j) snap_block(channels, t, layout::hand_rot(j));
        break;
      case Modality::kFace:
        snap_block(channels, t, layout::kJaw);
        break;
    }
  }
}

FrameMatrix continuous_channels(const MotionClip& clip) {
  int width = layout::kContacts;
  if (clip.hand()) width += layout::kHandWidth;
  if (clip.face()) width += layout::kFaceWidth;
  FrameMatrix out(clip.frames(), width);
  out.leftCols(layout::kContacts) = clip.body().leftCols(layout::kContacts);
  int col = layout::kContacts;
  if (clip.hand()) {
    out.middleCols(col, layout::kHandWidth) = *clip.hand();
    col += layout::kHandWidth;
  }
  if (clip.face()) out.middleCols(col, layout::kFaceWidth) = *clip.face();
  return out;
}

MotionClip smooth_clip(const MotionClip& clip, double cutoff_hz, const ContactConfig& contacts,
                       JitterReport* report) {
  const double fps = clip.fps();
  const FrameMatrix before = continuous_channels(clip);

  FrameMatrix body = clip.body();
  body.leftCols(layout::kContacts) =
      smooth_motion(clip.body().leftCols(layout::kContacts), fps, cutoff_hz);
  reorthonormalize(Modality::kBody, body);
  recompute_velocities(body);
  rederive_contacts(body, fps, contacts);

  MotionClip out = clip.with_channels(Modality::kBody, std::move(body));
  for (Modality m : {Modality::kHand, Modality::kFace}) {
    if (!clip.has(m)) continue;
    FrameMatrix x = smooth_motion(clip.channels(m), fps, cutoff_hz);
    reorthonormalize(m, x);
    out = out.with_channels(m, std::move(x));
  }
  if (report != nullptr) {
    report->clip_id = clip.id();
    report->cutoff_hz = cutoff_hz;
    report->fps = fps;
    report->jitter_before = jitter_score(before, fps, cutoff_hz);
    report->per_channel_before = jitter_per_channel(before, fps, cutoff_hz);
    report->jitter_after = jitter_score(continuous_channels(out), fps, cutoff_hz);
  }
  return out;
}

}  // namespace t2mx::prep
