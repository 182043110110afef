#pragma once

#include <string>

#include "t2mx/core/clip.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/core/skeleton.hpp"

namespace t2mx::core {

/// Reflection of one pose through the sagittal (x = 0) plane: left/right
/// joints swap, lateral components flip, rotations are conjugated by
/// diag(-1, 1, 1). Face channels pass through.
WholeBodyPose mirror_pose(const WholeBodyPose& pose, const Skeleton& skeleton = Skeleton::canonical());

/// Mirrors body and hand channels frame by frame; face channels are copied.
/// Text is left untouched (see mirror_text).
MotionClip mirror_clip(const MotionClip& clip, const Skeleton& skeleton = Skeleton::canonical());

/// Swaps the words "left" and "right" so descriptions follow a mirrored clip.
std::string mirror_text(const std::string& text);

}  // namespace t2mx::core
