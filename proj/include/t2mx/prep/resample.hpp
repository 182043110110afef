#pragma once

#include "t2mx/core/clip.hpp"
#include "t2mx/core/kinematics.hpp"

namespace t2mx::prep {

/// Frame count after resampling T frames from `source_fps` to `target_fps`:
/// every output instant k / target_fps that falls inside the source span.
int resampled_length(int frames, double source_fps, double target_fps);

/// Linear interpolation of every column at the output instants.
core::FrameMatrix resample_matrix(const core::FrameMatrix& m, double source_fps, double target_fps);

/// Downsamples a clip. Positions, rotations, hands and face are interpolated
/// (6D blocks re-orthonormalized); the root trajectory is interpolated in world
/// space and re-encoded at the new rate; joint velocities and contacts are
/// recomputed. Throws kUnsupported when target_fps > clip fps.
core::MotionClip resample(const core::MotionClip& clip, double target_fps = 30.0,
                          const core::ContactConfig& contacts = {});

}  // namespace t2mx::prep
