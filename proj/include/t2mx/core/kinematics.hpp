#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "t2mx/core/clip.hpp"
#include "t2mx/core/skeleton.hpp"

namespace t2mx::core {

using JointFrame = std::array<Eigen::Vector3d, kBodyJoints>;
using JointSequence = std::vector<JointFrame>;
using RotationFrame = std::array<Eigen::Matrix3d, kBodyJoints>;

/// World-space pelvis trajectory. heading[0] = 0 and ground position (x, z)
/// starts at the origin; y carries the root height.
struct RootTrajectory {
  std::vector<double> heading;
  std::vector<Eigen::Vector3d> position;
  int frames() const { return static_cast<int>(heading.size()); }
};

/// Integrates the root channels: heading[t] = heading[t-1] + rate[t-1] and the
/// ground position advances by the root-frame velocity rotated by heading[t-1].
RootTrajectory integrate_root(const FrameMatrix& body);

/// Inverse of integrate_root: writes heading rate, root-frame planar velocity
/// and height into the first four columns. The last frame repeats the previous rate.
void encode_root(const RootTrajectory& trajectory, FrameMatrix& body);

/// Root-frame joint positions stored in the body channels.
JointSequence local_positions(const FrameMatrix& body);

/// World-space joint positions: heading-rotated local positions plus the root ground position.
JointSequence world_positions(const FrameMatrix& body);

struct FkResult {
  JointFrame positions;
  RotationFrame global;
};

/// Forward kinematics in the root frame. The pelvis sits at (0, root_height, 0)
/// with identity orientation (heading is factored out).
FkResult forward_kinematics(const RotationFrame& local, double root_height,
                            const Skeleton& skeleton = Skeleton::canonical());

/// Local joint rotations decoded from the 6D channels of one frame.
RotationFrame local_rotations(const FrameMatrix& body, int frame);

struct ContactConfig {
  /// Per-frame displacement threshold at the reference frame rate; squared
  /// displacement is compared against threshold².
  double threshold_m = 0.002;
  double reference_fps = 30.0;
};

/// Foot contact flags from world positions: 1 where the squared per-frame
/// displacement of the heel/toe joint is below the threshold; the last frame
/// copies the previous one. Throws kTooShort when T < 2.
Eigen::MatrixXf derive_foot_contacts(const JointSequence& world, double fps,
                                     const ContactConfig& config = {},
                                     const Skeleton& skeleton = Skeleton::canonical());

/// Recomputes body joint velocities (root frame, m/frame) from the stored
/// positions and root trajectory. The last frame copies the previous velocity.
void recompute_velocities(FrameMatrix& body);

/// Re-derives the four contact channels from the stored positions.
void rederive_contacts(FrameMatrix& body, double fps, const ContactConfig& config = {});

}  // namespace t2mx::core
