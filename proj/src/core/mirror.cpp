#include "t2mx/core/mirror.hpp"

#include <cctype>
#include <optional>

namespace t2mx::core {

namespace {

const Eigen::Matrix3d& reflection() {
  static const Eigen::Matrix3d s = Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal();
  return s;
}

Eigen::Vector3d reflect(const Eigen::Vector3d& v) { return reflection() * v; }

// Columns of S R S with S = diag(-1, 1, 1): S R (S e0) = -S a and S R (S e1) = S b.
// No orthonormalization, so the map stays linear in the stored channels.
Vector6d reflect_rot6d(const Vector6d& v) {
  const Eigen::Matrix3d& s = reflection();
  Vector6d out;
  out.head<3>() = -(s * v.head<3>());
  out.tail<3>() = s * v.tail<3>();
  return out;
}

}  // namespace

WholeBodyPose mirror_pose(const WholeBodyPose& pose, const Skeleton& skeleton) {
  WholeBodyPose out = pose;
  out.root[0] = -pose.root[0];
  out.root[1] = -pose.root[1];
  out.root[2] = pose.root[2];
  out.root[3] = pose.root[3];
  for (int j = 0; j < kBodyJoints; ++j) {
    const int src = skeleton.mirror_map[j];
    out.body_pos[j] = reflect(pose.body_pos[src]);
    out.body_vel[j] = reflect(pose.body_vel[src]);
    out.body_rot[j] = reflect_rot6d(pose.body_rot[src]);
  }
  // (left heel, left toe, right heel, right toe)
  out.foot_contacts = {pose.foot_contacts[2], pose.foot_contacts[3], pose.foot_contacts[0],
                       pose.foot_contacts[1]};
  for (int j = 0; j < kHandJoints; ++j) {
    out.hand_rot[j] = reflect_rot6d(pose.hand_rot[skeleton.hand_mirror_map[j]]);
  }
  return out;
}

MotionClip mirror_clip(const MotionClip& clip, const Skeleton& skeleton) {
  const int t = clip.frames();
  FrameMatrix body(t, layout::kBodyWidth);
  std::optional<FrameMatrix> hand;
  if (clip.hand()) hand.emplace(t, layout::kHandWidth);
  const std::span<const float> no_face;
  for (int i = 0; i < t; ++i) {
    const std::span<const float> b(clip.body().row(i).data(), layout::kBodyWidth);
    const std::span<const float> h =
        clip.hand() ? std::span<const float>(clip.hand()->row(i).data(), layout::kHandWidth)
                    : std::span<const float>();
    const WholeBodyPose mirrored = mirror_pose(WholeBodyPose::from_channels(b, h, no_face), skeleton);
    mirrored.body_to(std::span<float>(body.row(i).data(), layout::kBodyWidth));
    if (hand) mirrored.hand_to(std::span<float>(hand->row(i).data(), layout::kHandWidth));
  }
  return MotionClip(clip.id(), clip.fps(), std::move(body), std::move(hand), clip.face(),
                    clip.text());
}

std::string mirror_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto word_at = [&](std::size_t pos, std::string_view word) {
    if (text.compare(pos, word.size(), word) != 0) return false;
    const bool start_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(text[pos - 1]));
    const std::size_t end = pos + word.size();
    const bool end_ok = end >= text.size() || !std::isalpha(static_cast<unsigned char>(text[end]));
    return start_ok && end_ok;
  };
  while (i < text.size()) {
    if (word_at(i, "left")) {
      out += "right";
      i += 4;
    } else if (word_at(i, "right")) {
      out += "left";
      i += 5;
    } else if (word_at(i, "Left")) {
      out += "Right";
      i += 4;
    } else if (word_at(i, "Right")) {
      out += "Left";
      i += 5;
    } else {
      out += text[i++];
    }
  }
  return out;
}

}  // namespace t2mx::core
