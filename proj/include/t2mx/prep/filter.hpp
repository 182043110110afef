#pragma once

#include <vector>

#include <json.hpp>

#include "t2mx/core/clip.hpp"
#include "t2mx/core/kinematics.hpp"

namespace t2mx::prep {

using core::FrameMatrix;

/// Fraction of AC spectral power above `cutoff_hz`, per channel (mean
/// removed), averaged over the non-constant channels. 0 for constant input.
/// Requires T >= 8; throws kInvalidCutoff unless 0 < cutoff < fps/2.
double jitter_score(const FrameMatrix& m, double fps, double cutoff_hz);

/// Per-channel high-frequency ratios (0 for constant channels).
std::vector<double> jitter_per_channel(const FrameMatrix& m, double fps, double cutoff_hz);

/// Second-order Butterworth low-pass, applied forward and backward (zero phase)
/// over odd-reflection padding. Same preconditions as jitter_score.
FrameMatrix smooth_motion(const FrameMatrix& m, double fps, double cutoff_hz);

struct JitterReport {
  std::string clip_id;
  double jitter_before = 0.0;
  double jitter_after = 0.0;
  double cutoff_hz = 6.0;
  double fps = 30.0;
  std::vector<double> per_channel_before;
};

nlohmann::json report_to_json(const JitterReport& report);

/// Continuous channels of every present modality side by side (contacts excluded).
FrameMatrix continuous_channels(const core::MotionClip& clip);

/// Filters every continuous channel, re-projects 6D blocks onto rotations,
/// recomputes body velocities from the filtered positions and re-derives contacts.
core::MotionClip smooth_clip(const core::MotionClip& clip, double cutoff_hz,
                             const core::ContactConfig& contacts = {},
                             JitterReport* report = nullptr);

/// Snaps every 6D block of the modality back onto its canonical rotation.
void reorthonormalize(core::Modality modality, FrameMatrix& channels);

}  // namespace t2mx::prep
