#pragma once

#include <array>
#include <span>

#include "t2mx/core/rotation.hpp"
#include "t2mx/core/skeleton.hpp"

namespace t2mx::core {

// Channel layout of one frame, per modality.
namespace layout {
// body
inline constexpr int kRoot = 0;        // 4: heading rate, vx, vz (root frame), root height
inline constexpr int kRootWidth = 4;
inline constexpr int kBodyPos = 4;     // 21 x 3
inline constexpr int kBodyVel = 67;    // 21 x 3
inline constexpr int kBodyRot = 130;   // 21 x 6
inline constexpr int kContacts = 256;  // 4
inline constexpr int kBodyWidth = 260;
// hand: 30 x 6, left hand first
inline constexpr int kHandWidth = 180;
// face: jaw 6D followed by 50 expression coefficients
inline constexpr int kJaw = 0;
inline constexpr int kExpression = 6;
inline constexpr int kExpressionWidth = 50;
inline constexpr int kFaceWidth = 56;

constexpr int body_pos(int joint) { return kBodyPos + 3 * joint; }
constexpr int body_vel(int joint) { return kBodyVel + 3 * joint; }
constexpr int body_rot(int joint) { return kBodyRot + 6 * joint; }
constexpr int hand_rot(int joint) { return 6 * joint; }
}  // namespace layout

static_assert(layout::kBodyRot + 6 * kBodyJoints == layout::kContacts);
static_assert(layout::kContacts + 4 == layout::kBodyWidth);
static_assert(layout::kExpression + layout::kExpressionWidth == layout::kFaceWidth);

/// One whole-body frame as the tuple (r, b^p, b^v, b^r, c^f, h, j, f).
struct WholeBodyPose {
  std::array<double, 4> root{};
  std::array<Eigen::Vector3d, kBodyJoints> body_pos{};
  std::array<Eigen::Vector3d, kBodyJoints> body_vel{};
  std::array<Vector6d, kBodyJoints> body_rot{};
  std::array<float, 4> foot_contacts{};
  std::array<Vector6d, kHandJoints> hand_rot{};
  Vector6d jaw_rot = Vector6d::Zero();
  std::array<double, layout::kExpressionWidth> expression{};

  /// Rest pose: identity rotations everywhere, no velocity, zero contacts.
  static WholeBodyPose identity();

  static WholeBodyPose from_channels(std::span<const float> body, std::span<const float> hand,
                                     std::span<const float> face);
  void body_to(std::span<float> out) const;
  void hand_to(std::span<float> out) const;
  void face_to(std::span<float> out) const;
};

inline Vector6d identity_rot6d() {
  Vector6d v;
  v << 1, 0, 0, 0, 1, 0;
  return v;
}

}  // namespace t2mx::core
