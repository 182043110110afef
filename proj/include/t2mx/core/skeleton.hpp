#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace t2mx::core {

// Canonical 21-joint body ordering: SMPL-X body joints 1..21 (pelvis is the
// root and lives in the root vector). Frame convention: y up, z forward,
// +x toward the body's left.
enum BodyJoint : int {
  kLeftHip = 0,
  kRightHip = 1,
  kSpine1 = 2,
  kLeftKnee = 3,
  kRightKnee = 4,
  kSpine2 = 5,
  kLeftAnkle = 6,
  kRightAnkle = 7,
  kSpine3 = 8,
  kLeftFoot = 9,
  kRightFoot = 10,
  kNeck = 11,
  kLeftCollar = 12,
  kRightCollar = 13,
  kHead = 14,
  kLeftShoulder = 15,
  kRightShoulder = 16,
  kLeftElbow = 17,
  kRightElbow = 18,
  kLeftWrist = 19,
  kRightWrist = 20,
};

inline constexpr int kBodyJoints = 21;
inline constexpr int kHandJointsPerSide = 15;
inline constexpr int kHandJoints = 2 * kHandJointsPerSide;
inline constexpr int kRootParent = -1;

// Finger joints per hand, SMPL-X order.
enum FingerJoint : int {
  kIndex1 = 0, kIndex2, kIndex3,
  kMiddle1, kMiddle2, kMiddle3,
  kPinky1, kPinky2, kPinky3,
  kRing1, kRing2, kRing3,
  kThumb1, kThumb2, kThumb3,
};

struct Skeleton {
  std::vector<std::string> joint_names;
  std::vector<int> parents;     // kRootParent for children of the pelvis
  std::vector<int> mirror_map;  // joint -> its left/right counterpart (self for midline joints)
  std::array<int, 4> heel_toe_indices;  // left heel, left toe, right heel, right toe
  std::vector<Eigen::Vector3d> offsets;  // rest offset from the parent, root frame
  Eigen::Vector3d pelvis_rest{0.0, 0.96, 0.0};

  std::vector<std::string> hand_joint_names;  // 30 entries, left hand first
  std::vector<int> hand_mirror_map;

  int size() const { return static_cast<int>(parents.size()); }
  double bone_length(int joint) const { return offsets[joint].norm(); }

  /// Frozen table shipped with the library.
  static const Skeleton& canonical();
};

nlohmann::json skeleton_to_json(const Skeleton& skeleton);
/// Throws kMalformed on inconsistent tables (sizes, parent order, non-involutive mirror map).
Skeleton skeleton_from_json(const nlohmann::json& j);

/// Joints driven from recovered (position-derived) rotations in the hybrid visual pose.
inline constexpr std::array<int, 6> kLegJoints = {kLeftHip, kRightHip, kLeftKnee,
                                                 kRightKnee, kLeftAnkle, kRightAnkle};

bool is_leg_joint(int joint);

}  // namespace t2mx::core
