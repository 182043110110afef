#include "t2mx/prep/resample.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "t2mx/core/error.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/prep/filter.hpp"

namespace t2mx::prep {

using namespace t2mx::core;

int resampled_length(int frames, double source_fps, double target_fps) {
  const double span = static_cast<double>(frames - 1) / source_fps;
  return static_cast<int>(std::floor(span * target_fps + 1e-9)) + 1;
}

namespace {

// Source position (in frames) of output sample k, clamped into the source span.
struct Tap {
  int lo;
  int hi;
  double w;
};

std::vector<Tap> taps(int frames, double source_fps, double target_fps) {
  const int n = resampled_length(frames, source_fps, target_fps);
  std::vector<Tap> out(n);
  for (int k = 0; k < n; ++k) {
    const double pos = static_cast<double>(k) * source_fps / target_fps;
    int lo = static_cast<int>(std::floor(pos + 1e-9));
    lo = std::clamp(lo, 0, frames - 1);
    const int hi = std::min(lo + 1, frames - 1);
    double w = pos - lo;
    if (hi == lo || w < 1e-9) w = 0.0;
    out[k] = {lo, hi, w};
  }
  return out;
}

}  // namespace

FrameMatrix resample_matrix(const FrameMatrix& m, double source_fps, double target_fps) {
  require(target_fps <= source_fps, ErrorCode::kUnsupported,
          "upsampling from " + std::to_string(source_fps) + " to " + std::to_string(target_fps) +
              " fps is not supported");
  if (target_fps == source_fps) return m;
  const auto tap = taps(static_cast<int>(m.rows()), source_fps, target_fps);
  FrameMatrix out(static_cast<Eigen::Index>(tap.size()), m.cols());
  for (std::size_t k = 0; k < tap.size(); ++k) {
    const auto& [lo, hi, w] = tap[k];
    if (w == 0.0) {
      out.row(k) = m.row(lo);
    } else {
      out.row(k) = ((1.0 - w) * m.row(lo).cast<double>() + w * m.row(hi).cast<double>()).cast<float>();
    }
  }
  return out;
}

MotionClip resample(const MotionClip& clip, double target_fps, const ContactConfig& contacts) {
  const double source_fps = clip.fps();
  require(target_fps <= source_fps, ErrorCode::kUnsupported,
          "clip " + clip.id() + ": upsampling to " + std::to_string(target_fps) + " fps");
  if (target_fps == source_fps) return clip;

  const auto tap = taps(clip.frames(), source_fps, target_fps);
  const int n = static_cast<int>(tap.size());

  // Root trajectory in world space, interpolated then re-encoded at the new rate.
  const RootTrajectory src_root = integrate_root(clip.body());
  RootTrajectory root;
  root.heading.resize(n);
  root.position.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto& [lo, hi, w] = tap[k];
    root.heading[k] = (1.0 - w) * src_root.heading[lo] + w * src_root.heading[hi];
    root.position[k] = (1.0 - w) * src_root.position[lo] + w * src_root.position[hi];
  }

  FrameMatrix body = resample_matrix(clip.body(), source_fps, target_fps);
  encode_root(root, body);
  reorthonormalize(Modality::kBody, body);
  recompute_velocities(body);
  if (n >= 2) {
    rederive_contacts(body, target_fps, contacts);
  } else {
    body.block(0, layout::kContacts, n, 4) = clip.body().block(0, layout::kContacts, 1, 4);
  }

  std::optional<FrameMatrix> extra[2];
  int slot = 0;
  for (Modality m : {Modality::kHand, Modality::kFace}) {
    if (clip.has(m)) {
      FrameMatrix x = resample_matrix(clip.channels(m), source_fps, target_fps);
      reorthonormalize(m, x);
      extra[slot] = std::move(x);
    }
    ++slot;
  }
  MotionClip out(clip.id(), target_fps, std::move(body), std::move(extra[0]), std::move(extra[1]),
                 clip.text());
  return out;
}

}  // namespace t2mx::prep
