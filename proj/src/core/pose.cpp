#include "t2mx/core/pose.hpp"

#include "t2mx/core/error.hpp"

namespace t2mx::core {

WholeBodyPose WholeBodyPose::identity() {
  WholeBodyPose p;
  for (auto& v : p.body_pos) v.setZero();
  for (auto& v : p.body_vel) v.setZero();
  for (auto& r : p.body_rot) r = identity_rot6d();
  for (auto& r : p.hand_rot) r = identity_rot6d();
  p.jaw_rot = identity_rot6d();
  return p;
}

WholeBodyPose WholeBodyPose::from_channels(std::span<const float> body, std::span<const float> hand,
                                           std::span<const float> face) {
  WholeBodyPose p = identity();
  if (!body.empty()) {
    require(body.size() == layout::kBodyWidth, ErrorCode::kShape, "body frame width");
    for (int i = 0; i < 4; ++i) p.root[i] = body[layout::kRoot + i];
    for (int j = 0; j < kBodyJoints; ++j) {
      for (int k = 0; k < 3; ++k) {
        p.body_pos[j][k] = body[layout::body_pos(j) + k];
        p.body_vel[j][k] = body[layout::body_vel(j) + k];
      }
      for (int k = 0; k < 6; ++k) p.body_rot[j][k] = body[layout::body_rot(j) + k];
    }
    for (int i = 0; i < 4; ++i) p.foot_contacts[i] = body[layout::kContacts + i];
  }
  if (!hand.empty()) {
    require(hand.size() == layout::kHandWidth, ErrorCode::kShape, "hand frame width");
    for (int j = 0; j < kHandJoints; ++j) {
      for (int k = 0; k < 6; ++k) p.hand_rot[j][k] = hand[layout::hand_rot(j) + k];
    }
  }
  if (!face.empty()) {
    require(face.size() == layout::kFaceWidth, ErrorCode::kShape, "face frame width");
    for (int k = 0; k < 6; ++k) p.jaw_rot[k] = face[layout::kJaw + k];
    for (int k = 0; k < layout::kExpressionWidth; ++k) p.expression[k] = face[layout::kExpression + k];
  }
  return p;
}

void WholeBodyPose::body_to(std::span<float> out) const {
  require(out.size() == layout::kBodyWidth, ErrorCode::kShape, "body frame width");
  for (int i = 0; i < 4; ++i) out[layout::kRoot + i] = static_cast<float>(root[i]);
  for (int j = 0; j < kBodyJoints; ++j) {
    for (int k = 0; k < 3; ++k) {
      out[layout::body_pos(j) + k] = static_cast<float>(body_pos[j][k]);
      out[layout::body_vel(j) + k] = static_cast<float>(body_vel[j][k]);
    }
    for (int k = 0; k < 6; ++k) out[layout::body_rot(j) + k] = static_cast<float>(body_rot[j][k]);
  }
  for (int i = 0; i < 4; ++i) out[layout::kContacts + i] = foot_contacts[i];
}

void WholeBodyPose::hand_to(std::span<float> out) const {
  require(out.size() == layout::kHandWidth, ErrorCode::kShape, "hand frame width");
  for (int j = 0; j < kHandJoints; ++j) {
    for (int k = 0; k < 6; ++k) out[layout::hand_rot(j) + k] = static_cast<float>(hand_rot[j][k]);
  }
}

void WholeBodyPose::face_to(std::span<float> out) const {
  require(out.size() == layout::kFaceWidth, ErrorCode::kShape, "face frame width");
  for (int k = 0; k < 6; ++k) out[layout::kJaw + k] = static_cast<float>(jaw_rot[k]);
  for (int k = 0; k < layout::kExpressionWidth; ++k) {
    out[layout::kExpression + k] = static_cast<float>(expression[k]);
  }
}

}  // namespace t2mx::core
