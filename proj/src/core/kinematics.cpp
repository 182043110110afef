#include "t2mx/core/kinematics.hpp"

#include <cmath>

#include "t2mx/core/error.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/core/rotation.hpp"

namespace t2mx::core {

RootTrajectory integrate_root(const FrameMatrix& body) {
  const int t = static_cast<int>(body.rows());
  RootTrajectory out;
  out.heading.assign(t, 0.0);
  out.position.assign(t, Eigen::Vector3d::Zero());
  for (int i = 0; i < t; ++i) {
    if (i > 0) {
      const double rate = body(i - 1, layout::kRoot + 0);
      const Eigen::Vector3d local_vel(body(i - 1, layout::kRoot + 1), 0.0,
                                      body(i - 1, layout::kRoot + 2));
      out.heading[i] = out.heading[i - 1] + rate;
      out.position[i] = out.position[i - 1] + heading_rotation(out.heading[i - 1]) * local_vel;
    }
    out.position[i].y() = body(i, layout::kRoot + 3);
  }
  return out;
}

void encode_root(const RootTrajectory& trajectory, FrameMatrix& body) {
  const int t = trajectory.frames();
  require(t == body.rows(), ErrorCode::kShape, "trajectory length mismatch");
  for (int i = 0; i < t; ++i) {
    body(i, layout::kRoot + 3) = static_cast<float>(trajectory.position[i].y());
    if (i + 1 < t) {
      Eigen::Vector3d delta = trajectory.position[i + 1] - trajectory.position[i];
      delta.y() = 0.0;
      const Eigen::Vector3d local = heading_rotation(trajectory.heading[i]).transpose() * delta;
      body(i, layout::kRoot + 0) =
          static_cast<float>(trajectory.heading[i + 1] - trajectory.heading[i]);
      body(i, layout::kRoot + 1) = static_cast<float>(local.x());
      body(i, layout::kRoot + 2) = static_cast<float>(local.z());
    } else if (t >= 2) {
      for (int k = 0; k < 3; ++k) body(i, layout::kRoot + k) = body(i - 1, layout::kRoot + k);
    } else {
      for (int k = 0; k < 3; ++k) body(i, layout::kRoot + k) = 0.0f;
    }
  }
}

JointSequence local_positions(const FrameMatrix& body) {
  JointSequence out(body.rows());
  for (Eigen::Index i = 0; i < body.rows(); ++i) {
    for (int j = 0; j < kBodyJoints; ++j) {
      const int c = layout::body_pos(j);
      out[i][j] = Eigen::Vector3d(body(i, c), body(i, c + 1), body(i, c + 2));
    }
  }
  return out;
}

JointSequence world_positions(const FrameMatrix& body) {
  const RootTrajectory root = integrate_root(body);
  JointSequence local = local_positions(body);
  for (std::size_t i = 0; i < local.size(); ++i) {
    const Eigen::Matrix3d r = heading_rotation(root.heading[i]);
    const Eigen::Vector3d ground(root.position[i].x(), 0.0, root.position[i].z());
    for (auto& p : local[i]) p = r * p + ground;
  }
  return local;
}

FkResult forward_kinematics(const RotationFrame& local, double root_height,
                            const Skeleton& skeleton) {
  FkResult out;
  const Eigen::Vector3d pelvis(0.0, root_height, 0.0);
  for (int j = 0; j < kBodyJoints; ++j) {
    const int p = skeleton.parents[j];
    const Eigen::Matrix3d parent_rot = p == kRootParent ? Eigen::Matrix3d::Identity() : out.global[p];
    const Eigen::Vector3d parent_pos = p == kRootParent ? pelvis : out.positions[p];
    out.positions[j] = parent_pos + parent_rot * skeleton.offsets[j];
    out.global[j] = parent_rot * local[j];
  }
  return out;
}

RotationFrame local_rotations(const FrameMatrix& body, int frame) {
  RotationFrame out;
  for (int j = 0; j < kBodyJoints; ++j) {
    Vector6d v;
    for (int k = 0; k < 6; ++k) v[k] = body(frame, layout::body_rot(j) + k);
    out[j] = matrix_from_rot6d(v);
  }
  return out;
}

Eigen::MatrixXf derive_foot_contacts(const JointSequence& world, double fps,
                                     const ContactConfig& config, const Skeleton& skeleton) {
  const int t = static_cast<int>(world.size());
  require(t >= 2, ErrorCode::kTooShort, "foot contacts need at least 2 frames");
  const double threshold = config.threshold_m * config.reference_fps / fps;
  const double threshold_sq = threshold * threshold;
  Eigen::MatrixXf flags(t, 4);
  for (int i = 0; i + 1 < t; ++i) {
    for (int k = 0; k < 4; ++k) {
      const int j = skeleton.heel_toe_indices[k];
      const double d2 = (world[i + 1][j] - world[i][j]).squaredNorm();
      flags(i, k) = d2 < threshold_sq ? 1.0f : 0.0f;
    }
  }
  flags.row(t - 1) = flags.row(t - 2);
  return flags;
}

void recompute_velocities(FrameMatrix& body) {
  const int t = static_cast<int>(body.rows());
  if (t < 2) {
    body.block(0, layout::kBodyVel, t, 3 * kBodyJoints).setZero();
    return;
  }
  const RootTrajectory root = integrate_root(body);
  const JointSequence world = world_positions(body);
  for (int i = 0; i + 1 < t; ++i) {
    const Eigen::Matrix3d inv = heading_rotation(root.heading[i]).transpose();
    for (int j = 0; j < kBodyJoints; ++j) {
      const Eigen::Vector3d v = inv * (world[i + 1][j] - world[i][j]);
      for (int k = 0; k < 3; ++k) body(i, layout::body_vel(j) + k) = static_cast<float>(v[k]);
    }
  }
  body.block(t - 1, layout::kBodyVel, 1, 3 * kBodyJoints) =
      body.block(t - 2, layout::kBodyVel, 1, 3 * kBodyJoints);
}

void rederive_contacts(FrameMatrix& body, double fps, const ContactConfig& config) {
  if (body.rows() < 2) {
    body.block(0, layout::kContacts, body.rows(), 4).setZero();
    return;
  }
  const Eigen::MatrixXf flags = derive_foot_contacts(world_positions(body), fps, config);
  body.block(0, layout::kContacts, body.rows(), 4) = flags;
}

}  // namespace t2mx::core
