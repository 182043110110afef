#include "t2mx/core/skeleton.hpp"

#include <algorithm>

#include "t2mx/core/error.hpp"

namespace t2mx::core {

namespace {

Skeleton build_canonical() {
  Skeleton s;
  s.joint_names = {"left_hip",      "right_hip",      "spine1",      "left_knee",   "right_knee",
                   "spine2",        "left_ankle",     "right_ankle", "spine3",      "left_foot",
                   "right_foot",    "neck",           "left_collar", "right_collar", "head",
                   "left_shoulder", "right_shoulder", "left_elbow",  "right_elbow", "left_wrist",
                   "right_wrist"};
  s.parents = {kRootParent, kRootParent, kRootParent, kLeftHip,      kRightHip,     kSpine1,
               kLeftKnee,   kRightKnee,  kSpine2,     kLeftAnkle,    kRightAnkle,   kSpine3,
               kSpine3,     kSpine3,     kNeck,       kLeftCollar,   kRightCollar,  kLeftShoulder,
               kRightShoulder, kLeftElbow, kRightElbow};
  s.mirror_map = {kRightHip,     kLeftHip,     kSpine1,       kRightKnee,     kLeftKnee,
                  kSpine2,       kRightAnkle,  kLeftAnkle,    kSpine3,        kRightFoot,
                  kLeftFoot,     kNeck,        kRightCollar,  kLeftCollar,    kHead,
                  kRightShoulder, kLeftShoulder, kRightElbow, kLeftElbow,     kRightWrist,
                  kLeftWrist};
  s.heel_toe_indices = {kLeftAnkle, kLeftFoot, kRightAnkle, kRightFoot};
  s.offsets = {
      {0.09, -0.08, 0.0},   // left_hip
      {-0.09, -0.08, 0.0},  // right_hip
      {0.0, 0.11, 0.0},     // spine1
      {0.0, -0.40, 0.0},    // left_knee
      {0.0, -0.40, 0.0},    // right_knee
      {0.0, 0.13, 0.0},     // spine2
      {0.0, -0.42, 0.0},    // left_ankle
      {0.0, -0.42, 0.0},    // right_ankle
      {0.0, 0.05, 0.0},     // spine3
      {0.0, -0.06, 0.13},   // left_foot
      {0.0, -0.06, 0.13},   // right_foot
      {0.0, 0.22, 0.0},     // neck
      {0.07, 0.13, 0.0},    // left_collar
      {-0.07, 0.13, 0.0},   // right_collar
      {0.0, 0.10, 0.03},    // head
      {0.11, 0.02, 0.0},    // left_shoulder
      {-0.11, 0.02, 0.0},   // right_shoulder
      {0.26, 0.0, 0.0},     // left_elbow
      {-0.26, 0.0, 0.0},    // right_elbow
      {0.25, 0.0, 0.0},     // left_wrist
      {-0.25, 0.0, 0.0},    // right_wrist
  };
  s.pelvis_rest = {0.0, 0.96, 0.0};

  const std::array<const char*, kHandJointsPerSide> fingers = {
      "index1", "index2", "index3", "middle1", "middle2", "middle3", "pinky1", "pinky2",
      "pinky3", "ring1",  "ring2",  "ring3",   "thumb1",  "thumb2",  "thumb3"};
  for (const char* side : {"left_", "right_"}) {
    for (const char* f : fingers) s.hand_joint_names.push_back(std::string(side) + f);
  }
  for (int i = 0; i < kHandJoints; ++i) {
    s.hand_mirror_map.push_back(i < kHandJointsPerSide ? i + kHandJointsPerSide
                                                       : i - kHandJointsPerSide);
  }
  return s;
}

void validate(const Skeleton& s) {
  const auto n = s.parents.size();
  require(n > 0 && s.joint_names.size() == n && s.mirror_map.size() == n && s.offsets.size() == n,
          ErrorCode::kMalformed, "skeleton tables have inconsistent sizes");
  for (std::size_t j = 0; j < n; ++j) {
    const int p = s.parents[j];
    require(p == kRootParent || (p >= 0 && static_cast<std::size_t>(p) < j), ErrorCode::kMalformed,
            "skeleton parents must precede children");
    const int m = s.mirror_map[j];
    require(m >= 0 && static_cast<std::size_t>(m) < n && s.mirror_map[m] == static_cast<int>(j),
            ErrorCode::kMalformed, "mirror map must be an involution");
  }
  for (int idx : s.heel_toe_indices) {
    require(idx >= 0 && static_cast<std::size_t>(idx) < n, ErrorCode::kMalformed,
            "heel/toe index out of range");
  }
  require(s.hand_mirror_map.size() == s.hand_joint_names.size(), ErrorCode::kMalformed,
          "hand tables have inconsistent sizes");
}

}  // namespace

const Skeleton& Skeleton::canonical() {
  static const Skeleton skeleton = [] {
    Skeleton s = build_canonical();
    validate(s);
    return s;
  }();
  return skeleton;
}

bool is_leg_joint(int joint) {
  return std::find(kLegJoints.begin(), kLegJoints.end(), joint) != kLegJoints.end();
}

nlohmann::json skeleton_to_json(const Skeleton& s) {
  nlohmann::json j;
  j["joint_names"] = s.joint_names;
  j["parents"] = s.parents;
  j["mirror_map"] = s.mirror_map;
  j["heel_toe_indices"] = s.heel_toe_indices;
  auto& offsets = j["offsets"] = nlohmann::json::array();
  for (const auto& o : s.offsets) offsets.push_back({o.x(), o.y(), o.z()});
  j["pelvis_rest"] = {s.pelvis_rest.x(), s.pelvis_rest.y(), s.pelvis_rest.z()};
  j["hand_joint_names"] = s.hand_joint_names;
  j["hand_mirror_map"] = s.hand_mirror_map;
  return j;
}

Skeleton skeleton_from_json(const nlohmann::json& j) {
  Skeleton s;
  try {
    s.joint_names = j.at("joint_names").get<std::vector<std::string>>();
    s.parents = j.at("parents").get<std::vector<int>>();
    s.mirror_map = j.at("mirror_map").get<std::vector<int>>();
    s.heel_toe_indices = j.at("heel_toe_indices").get<std::array<int, 4>>();
    // Offsets are optional in hand-written tables; fall back to the canonical rest pose.
    if (j.contains("offsets")) {
      for (const auto& o : j.at("offsets")) {
        s.offsets.emplace_back(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>());
      }
    } else {
      s.offsets = Skeleton::canonical().offsets;
    }
    if (j.contains("pelvis_rest")) {
      const auto& p = j.at("pelvis_rest");
      s.pelvis_rest = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
    }
    if (j.contains("hand_joint_names")) {
      s.hand_joint_names = j.at("hand_joint_names").get<std::vector<std::string>>();
      s.hand_mirror_map = j.at("hand_mirror_map").get<std::vector<int>>();
    } else {
      s.hand_joint_names = Skeleton::canonical().hand_joint_names;
      s.hand_mirror_map = Skeleton::canonical().hand_mirror_map;
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformed, std::string("skeleton json: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace t2mx::core
