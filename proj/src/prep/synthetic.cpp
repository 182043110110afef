#include "t2mx/prep/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "t2mx/core/error.hpp"
#include "t2mx/core/kinematics.hpp"
#include "t2mx/core/leg_ik.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/core/random.hpp"
#include "t2mx/core/rotation.hpp"

namespace t2mx::prep {

using namespace t2mx::core;
using Eigen::Matrix3d;
using Eigen::Vector3d;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAnkleHeight = 0.06;
constexpr double kHipHalfWidth = 0.09;
constexpr double kArmDown = -1.3;

Matrix3d rx(double a) { return axis_angle(Vector3d::UnitX(), a); }
Matrix3d ry(double a) { return axis_angle(Vector3d::UnitY(), a); }
Matrix3d rz(double a) { return axis_angle(Vector3d::UnitZ(), a); }

// Reflection through the sagittal plane applied to a rotation: S R S.
Matrix3d reflect(const Matrix3d& r) {
  const Eigen::DiagonalMatrix<double, 3> s(-1.0, 1.0, 1.0);
  return s * r * s;
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

double frac(double x) { return x - std::floor(x); }

double raised_cosine(double cycles) { return 0.5 - 0.5 * std::cos(kTwoPi * cycles); }

const char* side_word(Side s) { return s == Side::kLeft ? "left" : "right"; }

// ---------------------------------------------------------------------------
// Body planning

struct FootState {
  Vector3d ankle = Vector3d::Zero();  // world
  double heading = 0.0;
  bool planted = true;
  long anchor = 0;  // identifies one planted interval
};

struct BodyPlan {
  double heading = 0.0;
  Vector3d ground = Vector3d::Zero();  // (x, 0, z)
  double height = 0.90;
  std::array<FootState, 2> feet;
  RotationFrame rot;  // legs are overwritten by IK
};

struct Gait {
  double stride;      // m per cycle
  double period;      // s per cycle
  double stance;      // stance fraction
  double turn;        // rad/s
  double height;
  double bob;
  double lift;
};

Vector3d gait_ground(const Gait& g, double s) {
  const double v = g.stride / g.period;
  if (std::abs(g.turn) < 1e-9) return {0.0, 0.0, v * s};
  const double r = v / g.turn;
  return {r * (1.0 - std::cos(g.turn * s)), 0.0, r * std::sin(g.turn * s)};
}

double foot_lateral(int foot) { return foot == 0 ? kHipHalfWidth : -kHipHalfWidth; }

// Foot placement for stance cycle c of one foot: under the hip at mid-stance.
FootState landing(const Gait& g, int foot, long cycle, double offset) {
  const double mid = (static_cast<double>(cycle) - offset + 0.5 * g.stance) * g.period;
  FootState f;
  f.heading = g.turn * mid;
  f.ankle = gait_ground(g, mid) + heading_rotation(f.heading) * Vector3d(foot_lateral(foot), 0.0, 0.0);
  f.ankle.y() = kAnkleHeight;
  f.anchor = cycle;
  return f;
}

double foot_phase_offset(int foot) { return foot == 0 ? 0.0 : 0.5; }

FootState gait_foot(const Gait& g, int foot, double s) {
  const double offset = foot_phase_offset(foot);
  const double u = s / g.period + offset;
  const long cycle = static_cast<long>(std::floor(u));
  const double phase = u - static_cast<double>(cycle);
  FootState here = landing(g, foot, cycle, offset);
  if (phase < g.stance) return here;
  const FootState next = landing(g, foot, cycle + 1, offset);
  const double w = (phase - g.stance) / (1.0 - g.stance);
  FootState f;
  f.planted = false;
  f.anchor = -1;
  f.heading = (1.0 - w) * here.heading + w * next.heading;
  f.ankle = (1.0 - w) * here.ankle + w * next.ankle;
  f.ankle.y() += g.lift * std::sin(kPi * w);
  return f;
}

void rest_arms(RotationFrame& rot) {
  rot[kLeftShoulder] = rz(kArmDown);
  rot[kRightShoulder] = reflect(rz(kArmDown));
  rot[kLeftElbow] = ry(-0.15);
  rot[kRightElbow] = reflect(ry(-0.15));
}

void set_arm(RotationFrame& rot, Side side, const Matrix3d& shoulder, const Matrix3d& elbow,
             const Matrix3d& wrist) {
  if (side == Side::kLeft) {
    rot[kLeftShoulder] = shoulder;
    rot[kLeftElbow] = elbow;
    rot[kLeftWrist] = wrist;
  } else {
    rot[kRightShoulder] = reflect(shoulder);
    rot[kRightElbow] = reflect(elbow);
    rot[kRightWrist] = reflect(wrist);
  }
}

void planted_feet(BodyPlan& plan) {
  for (int f = 0; f < 2; ++f) {
    plan.feet[f].ankle = Vector3d(foot_lateral(f), kAnkleHeight, 0.0);
    plan.feet[f].heading = 0.0;
    plan.feet[f].planted = true;
    plan.feet[f].anchor = 0;
  }
}

void plan_gait(const Gait& g, double s, double arm_amp, double elbow, double lean, BodyPlan& plan) {
  plan.heading = g.turn * s;
  plan.ground = gait_ground(g, s);
  plan.height = g.height + g.bob * std::cos(2.0 * kTwoPi * s / g.period);
  for (int f = 0; f < 2; ++f) plan.feet[f] = gait_foot(g, f, s);
  for (int side = 0; side < 2; ++side) {
    const double phase = frac(s / g.period + foot_phase_offset(side));
    const double forward = -arm_amp * std::cos(kTwoPi * phase);
    set_arm(plan.rot, static_cast<Side>(side), rx(-forward) * rz(kArmDown), ry(-elbow), Matrix3d::Identity());
  }
  const double twist = 0.08 * std::sin(kTwoPi * s / g.period);
  plan.rot[kSpine1] = rx(lean) * ry(twist);
  plan.rot[kSpine3] = ry(-twist);
}

void plan_body(const std::string& action, Side side, const MotionStyle& st, double s,
               BodyPlan& plan) {
  for (auto& r : plan.rot) r = Matrix3d::Identity();
  rest_arms(plan.rot);
  planted_feet(plan);
  plan.heading = 0.0;
  plan.ground = Vector3d::Zero();
  plan.height = 0.90;
  const double e = st.energy;
  const double tempo = st.tempo;

  if (action == "walk" || action == "circle") {
    Gait g{0.65 + 0.15 * e, 1.0 / tempo, 0.6, 0.0, 0.90, 0.01, 0.06};
    if (action == "circle") g.turn = (side == Side::kLeft ? 1.0 : -1.0) * 0.9;
    plan_gait(g, s, 0.3 * e, 0.2, 0.03, plan);
  } else if (action == "run") {
    Gait g{1.1 + 0.3 * e, 0.7 / tempo, 0.35, 0.0, 0.86, 0.025, 0.12};
    plan_gait(g, s, 0.6 * e, 1.3, 0.15, plan);
  } else if (action == "jump") {
    const double period = 1.0 / tempo;
    const double p = frac(s / period);
    double lift = 0.0;
    if (p < 0.35) {
      plan.height = 0.90 - 0.12 * e * std::sin(kPi * p / 0.35);
    } else if (p < 0.65) {
      lift = 0.10 * e * std::sin(kPi * (p - 0.35) / 0.3);
      plan.height = 0.90 + lift;
    } else {
      plan.height = 0.90 - 0.08 * e * std::sin(kPi * (p - 0.65) / 0.35);
    }
    const long cycle = static_cast<long>(std::floor(s / period));
    for (auto& f : plan.feet) {
      f.anchor = cycle;
      if (p >= 0.35 && p < 0.65) {
        f.planted = false;
        f.anchor = -1;
        f.ankle.y() += lift;
      }
    }
    const double swing = p < 0.35 ? -0.6 * std::sin(kPi * p / 0.35) : 1.2 * std::sin(kPi * std::min(1.0, (p - 0.35) / 0.5));
    for (Side sd : {Side::kLeft, Side::kRight}) {
      set_arm(plan.rot, sd, rx(-swing * e) * rz(kArmDown), ry(-0.3), Matrix3d::Identity());
    }
  } else if (action == "squat") {
    const double depth = raised_cosine(s * tempo / 2.0);
    plan.height = 0.90 - 0.30 * e * depth;
    const double reach = 1.3 * e * depth;
    for (Side sd : {Side::kLeft, Side::kRight}) {
      set_arm(plan.rot, sd, rx(-reach) * rz(kArmDown), ry(-0.1), Matrix3d::Identity());
    }
    plan.rot[kSpine1] = rx(0.25 * depth);
  } else if (action == "kick") {
    const double period = 1.2 / tempo;
    const double p = frac(s / period);
    const int foot = static_cast<int>(side);
    FootState& f = plan.feet[foot];
    if (p >= 0.2 && p < 0.7) {
      const double q = std::sin(kPi * (p - 0.2) / 0.5);
      f.ankle += Vector3d(0.0, 0.25 * e * q, 0.45 * e * q);
      f.heading = 0.0;
      f.planted = false;
      f.anchor = -1;
    }
    const double counter = 0.4 * e * (p >= 0.2 && p < 0.7 ? std::sin(kPi * (p - 0.2) / 0.5) : 0.0);
    set_arm(plan.rot, side == Side::kLeft ? Side::kRight : Side::kLeft, rx(-counter) * rz(kArmDown),
            ry(-0.2), Matrix3d::Identity());
    plan.rot[kSpine1] = rx(-0.15 * counter);
  } else if (action == "raise-arms") {
    const double up = raised_cosine(s * tempo / 2.0);
    for (Side sd : {Side::kLeft, Side::kRight}) {
      set_arm(plan.rot, sd, rz(kArmDown + (1.3 + 1.4 * e) * up), ry(-0.1), Matrix3d::Identity());
    }
  } else if (action == "bow") {
    const double b = 0.35 * e * raised_cosine(s * tempo / 2.4);
    plan.rot[kSpine1] = rx(b);
    plan.rot[kSpine2] = rx(b);
    plan.rot[kSpine3] = rx(0.5 * b);
    for (Side sd : {Side::kLeft, Side::kRight}) {
      set_arm(plan.rot, sd, rx(-0.6 * b) * rz(kArmDown), ry(-0.1), Matrix3d::Identity());
    }
  } else if (action == "pick-up") {
    const double p = raised_cosine(s * tempo / 2.5);
    plan.height = 0.90 - 0.18 * e * p;
    for (int j : {kSpine1, kSpine2, kSpine3}) plan.rot[j] = rx(0.4 * e * p);
    plan.rot[kNeck] = rx(-0.3 * p);
    set_arm(plan.rot, Side::kRight, rx(-0.5 * p) * rz(-1.4), ry(-0.1), Matrix3d::Identity());
  } else if (action == "stand") {
    const double sway = std::sin(kTwoPi * 0.3 * tempo * s);
    plan.rot[kSpine1] = rz(0.03 * e * sway);
    plan.rot[kSpine3] = rz(-0.02 * e * sway);
    for (Side sd : {Side::kLeft, Side::kRight}) {
      set_arm(plan.rot, sd, rx(0.05 * sway) * rz(kArmDown), ry(-0.15), Matrix3d::Identity());
    }
  } else {
    raise(ErrorCode::kInvalidSpec, "unknown body generator '" + action + "'");
  }
}

// ---------------------------------------------------------------------------
// Hands

using HandFrame = std::array<Matrix3d, kHandJoints>;

struct FingerPose {
  std::array<double, 4> flex{0.2, 0.2, 0.2, 0.2};  // index, middle, pinky, ring
  double thumb = 0.2;
  double spread = 0.0;
};

void write_hand(const FingerPose& pose, Side side, HandFrame& out) {
  static constexpr std::array<double, 4> kSpreadDir = {0.15, 0.0, -0.2, -0.1};
  static constexpr std::array<double, 3> kJointScale = {1.0, 1.2, 0.8};
  std::array<Matrix3d, kHandJointsPerSide> local;
  for (int finger = 0; finger < 4; ++finger) {
    for (int k = 0; k < 3; ++k) {
      Matrix3d r = rz(-pose.flex[finger] * kJointScale[k]);
      if (k == 0) r = ry(kSpreadDir[finger] * pose.spread) * r;
      local[3 * finger + k] = r;
    }
  }
  for (int k = 0; k < 3; ++k) {
    local[kThumb1 + k] = ry(-0.5 * pose.thumb) * rx(-0.4 * pose.thumb * kJointScale[k]);
  }
  const int base = side == Side::kLeft ? 0 : kHandJointsPerSide;
  for (int j = 0; j < kHandJointsPerSide; ++j) {
    out[base + j] = side == Side::kLeft ? local[j] : reflect(local[j]);
  }
}

void plan_hand(const std::string& action, Side side, const MotionStyle& st, double s,
               RotationFrame& body, HandFrame& hands) {
  FingerPose relaxed;
  write_hand(relaxed, Side::kLeft, hands);
  write_hand(relaxed, Side::kRight, hands);
  if (action == "none") return;
  const double e = st.energy;
  const double tempo = st.tempo;
  FingerPose pose;
  if (action == "wave") {
    const double w = std::sin(kTwoPi * 2.0 * tempo * s);
    pose.flex = {0.1 + 0.08 * w, 0.1 + 0.08 * w, 0.1 + 0.08 * w, 0.1 + 0.08 * w};
    pose.thumb = 0.1;
    pose.spread = 1.0;
    set_arm(body, side, rz(0.35), rz(1.2 + 0.35 * e * w), ry(0.25 * e * std::sin(kTwoPi * 2.0 * tempo * s + 0.6)));
  } else if (action == "finger-curl") {
    const double c = e * raised_cosine(0.7 * tempo * s);
    pose.flex = {0.1 + 1.3 * c, 0.1 + 1.4 * c, 0.1 + 1.2 * c, 0.1 + 1.3 * c};
    pose.thumb = 0.1 + 0.9 * c;
    set_arm(body, side, rx(-0.4) * rz(-1.2), ry(-1.3), rz(-0.2 * c));
  } else if (action == "point") {
    const double p = raised_cosine(0.5 * tempo * s);
    pose.flex = {0.05, 1.3, 1.2, 1.3};
    pose.thumb = 0.8;
    set_arm(body, side, rx(-1.45 * e * p) * rz(kArmDown), ry(-0.1), Matrix3d::Identity());
  } else if (action == "clap") {
    const double open = 0.5 + 0.5 * std::sin(kTwoPi * 1.5 * tempo * s);
    pose.flex = {0.05, 0.05, 0.05, 0.05};
    pose.thumb = 0.1;
    const Matrix3d shoulder = ry(-(0.1 + 0.35 * e * open)) * rx(-1.3) * rz(kArmDown);
    for (Side sd : {Side::kLeft, Side::kRight}) {
      set_arm(body, sd, shoulder, ry(-0.4), Matrix3d::Identity());
      write_hand(pose, sd, hands);
    }
    return;
  } else {
    raise(ErrorCode::kInvalidSpec, "unknown hand generator '" + action + "'");
  }
  write_hand(pose, side, hands);
}

// ---------------------------------------------------------------------------
// Face

Eigen::VectorXd expression_pattern(int k) {
  Eigen::VectorXd p(layout::kExpressionWidth);
  for (int i = 0; i < layout::kExpressionWidth; ++i) {
    p[i] = 1.5 * std::sin(0.9 * (k + 1) * (i + 1) + k) * std::exp(-i / 30.0);
  }
  return p;
}

int face_index(const std::string& name);

void plan_face(const std::string& action, const MotionStyle& st, double s, double duration,
               RotationFrame& body, Eigen::Ref<Eigen::VectorXd> face) {
  const double e = st.energy;
  const double tempo = st.tempo;
  Eigen::VectorXd expr = Eigen::VectorXd::Zero(layout::kExpressionWidth);
  for (int i = 0; i < 3; ++i) expr[i] = 0.05 * std::sin(kTwoPi * 0.3 * s + i);
  double jaw = 0.02;
  if (action != "neutral") {
    const double intensity =
        e * smoothstep(s / std::min(0.4, 0.3 * duration)) * (1.0 + 0.15 * std::sin(kTwoPi * 0.5 * tempo * s));
    expr += intensity * expression_pattern(face_index(action));
    if (action == "smile") {
      jaw = 0.05 * intensity;
      body[kNeck] = rx(-0.1 * intensity);
    } else if (action == "frown") {
      body[kNeck] = rx(0.35 * intensity);
      body[kHead] = rx(0.2 * intensity);
    } else if (action == "surprise") {
      jaw = 0.35 * intensity;
      body[kHead] = rx(-0.2 * intensity);
    } else if (action == "angry") {
      body[kHead] = rx(0.1 * intensity) * ry(0.05 * std::sin(kTwoPi * 0.7 * tempo * s));
    } else if (action == "talk") {
      jaw = 0.12 * e * (1.0 + std::sin(kTwoPi * 3.5 * tempo * s));
      body[kHead] = rx(0.08 * std::sin(kTwoPi * 1.2 * tempo * s));
    }
  }
  const Vector6d j6 = rot6d_from_matrix(rx(jaw));
  face.head<6>() = j6;
  face.tail(layout::kExpressionWidth) = expr;
}

// ---------------------------------------------------------------------------
// Text

struct Phrases {
  std::array<std::string, 3> v;
};

std::string fill(std::string s, Side side) {
  const std::string key = "{side}";
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key)) {
    s.replace(pos, key.size(), side_word(side));
  }
  return s;
}

const std::map<std::string, Phrases>& body_phrases() {
  static const std::map<std::string, Phrases> m = {
      {"walk", {{"walks forward", "is walking forward", "walks ahead"}}},
      {"run", {{"runs forward", "is jogging forward", "runs ahead quickly"}}},
      {"circle",
       {{"walks in a circle to the {side}", "is walking around in a circle to the {side}",
         "circles to the {side} while walking"}}},
      {"jump", {{"jumps in place", "is jumping up and down", "hops on the spot"}}},
      {"squat", {{"squats down", "is doing squats", "bends the knees into a squat"}}},
      {"kick",
       {{"kicks with the {side} leg", "is kicking with the {side} leg", "does a {side} leg kick"}}},
      {"raise-arms", {{"raises both arms", "is lifting both arms up", "puts both arms in the air"}}},
      {"bow", {{"bows forward", "is bowing", "bends forward at the waist"}}},
      {"pick-up",
       {{"picks something up from the floor", "is bending down to pick up an object",
         "reaches down to grab something"}}},
      {"stand", {{"stands still", "is standing in place", "stands quietly"}}},
  };
  return m;
}

const std::map<std::string, Phrases>& hand_phrases() {
  static const std::map<std::string, Phrases> m = {
      {"none", {{"keeping the hands relaxed", "keeps the hands relaxed", "hands relaxed"}}},
      {"wave", {{"waving the {side} hand", "waves the {side} hand", "{side} hand waving"}}},
      {"finger-curl",
       {{"curling the fingers of the {side} hand", "curls the {side} hand into a fist",
         "{side} fingers curling"}}},
      {"point",
       {{"pointing with the {side} hand", "points forward with the {side} index finger",
         "{side} hand pointing ahead"}}},
      {"clap", {{"clapping the hands", "claps both hands", "hands clapping"}}},
  };
  return m;
}

const std::map<std::string, Phrases>& face_phrases() {
  static const std::map<std::string, Phrases> m = {
      {"neutral", {{"with a neutral face", "looking calm", "with a blank expression"}}},
      {"smile", {{"with a happy face", "looking happy", "smiling"}}},
      {"frown", {{"with a sad face", "looking sad", "frowning"}}},
      {"surprise", {{"with a surprised face", "looking surprised", "showing surprise"}}},
      {"angry", {{"with an angry face", "looking angry", "scowling"}}},
      {"talk", {{"with a talking face", "talking all the while", "chatting"}}},
  };
  return m;
}

const Phrases& lookup(const std::map<std::string, Phrases>& m, const std::string& key) {
  auto it = m.find(key);
  require(it != m.end(), ErrorCode::kInvalidSpec, "no phrases for generator '" + key + "'");
  return it->second;
}

int class_index(const std::string& name, Part part) {
  int k = 0;
  for (const auto& g : generator_catalog()) {
    if (g.part != part) continue;
    if (g.name == name) return k;
    ++k;
  }
  return -1;
}

int face_index(const std::string& name) { return class_index(name, Part::kFace); }

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<GeneratorInfo>& generator_catalog() {
  static const std::vector<GeneratorInfo> catalog = {
      {"walk", Part::kBody, false},       {"run", Part::kBody, false},
      {"circle", Part::kBody, true},      {"jump", Part::kBody, false},
      {"squat", Part::kBody, false},      {"kick", Part::kBody, true},
      {"raise-arms", Part::kBody, false}, {"bow", Part::kBody, false},
      {"pick-up", Part::kBody, false},    {"stand", Part::kBody, false},
      {"wave", Part::kHand, true},        {"finger-curl", Part::kHand, true},
      {"point", Part::kHand, true},       {"clap", Part::kHand, false},
      {"smile", Part::kFace, false},      {"frown", Part::kFace, false},
      {"surprise", Part::kFace, false},   {"angry", Part::kFace, false},
      {"talk", Part::kFace, false},
  };
  return catalog;
}

const GeneratorInfo& find_generator(const std::string& name) {
  for (const auto& g : generator_catalog()) {
    if (g.name == name) return g;
  }
  raise(ErrorCode::kInvalidSpec, "unknown generator '" + name + "'");
}

std::vector<std::string> default_vocabulary() {
  std::vector<std::string> out;
  for (const auto& g : generator_catalog()) out.push_back(g.name);
  return out;
}

void SyntheticSpec::validate() const {
  require(!vocabulary.empty(), ErrorCode::kInvalidSpec, "vocabulary is empty");
  bool has_body = false;
  std::set<std::string> seen;
  for (const auto& name : vocabulary) {
    const auto& g = find_generator(name);
    has_body = has_body || g.part == Part::kBody;
    require(seen.insert(name).second, ErrorCode::kInvalidSpec, "duplicate generator '" + name + "'");
  }
  require(has_body, ErrorCode::kInvalidSpec, "vocabulary needs at least one body generator");
  require(clips >= 1, ErrorCode::kInvalidSpec, "clip count must be positive");
  require(min_frames >= 8 && max_frames >= min_frames, ErrorCode::kInvalidSpec,
          "duration range must satisfy 8 <= min_frames <= max_frames");
  require(fps > 0.0, ErrorCode::kInvalidSpec, "fps must be positive");
  for (double p : {p_body, p_hand, p_face, jitter_fraction}) {
    require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidSpec, "probabilities must lie in [0, 1]");
  }
  require(p_body == 1.0, ErrorCode::kInvalidSpec, "body probability must be 1");
  require(jitter_amplitude >= 0.0, ErrorCode::kInvalidSpec, "jitter amplitude must be >= 0");
}

nlohmann::json spec_to_json(const SyntheticSpec& s) {
  return {{"clips", s.clips},
          {"min_frames", s.min_frames},
          {"max_frames", s.max_frames},
          {"fps", s.fps},
          {"vocabulary", s.vocabulary},
          {"p_body", s.p_body},
          {"p_hand", s.p_hand},
          {"p_face", s.p_face},
          {"jitter_amplitude", s.jitter_amplitude},
          {"jitter_fraction", s.jitter_fraction},
          {"seed", s.seed}};
}

SyntheticSpec spec_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorCode::kConfig, "synthetic spec must be an object");
  SyntheticSpec s;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "clips") s.clips = value.get<int>();
      else if (key == "min_frames") s.min_frames = value.get<int>();
      else if (key == "max_frames") s.max_frames = value.get<int>();
      else if (key == "fps") s.fps = value.get<double>();
      else if (key == "vocabulary") s.vocabulary = value.get<std::vector<std::string>>();
      else if (key == "p_body") s.p_body = value.get<double>();
      else if (key == "p_hand") s.p_hand = value.get<double>();
      else if (key == "p_face") s.p_face = value.get<double>();
      else if (key == "jitter_amplitude") s.jitter_amplitude = value.get<double>();
      else if (key == "jitter_fraction") s.jitter_fraction = value.get<double>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else raise(ErrorCode::kConfig, "unknown synthetic spec key '" + key + "'");
    } catch (const nlohmann::json::exception& ex) {
      raise(ErrorCode::kConfig, "synthetic spec key '" + key + "': " + ex.what());
    }
  }
  return s;
}

SynthesizedMotion synthesize(const Composition& c, const MotionStyle& style, int frames,
                             double fps) {
  require(frames >= 2, ErrorCode::kTooShort, "synthesize needs at least 2 frames");
  const Skeleton& sk = Skeleton::canonical();
  LegChain chain;
  chain.thigh = sk.bone_length(kLeftKnee);
  chain.shin = sk.bone_length(kLeftAnkle);
  chain.foot_offset = sk.offsets[kLeftFoot];
  if (c.face != "neutral") {
    require(find_generator(c.face).part == Part::kFace, ErrorCode::kInvalidSpec, c.face + " is not a face generator");
  }

  SynthesizedMotion out;
  out.body = FrameMatrix::Zero(frames, layout::kBodyWidth);
  out.hand = FrameMatrix::Zero(frames, layout::kHandWidth);
  out.face = FrameMatrix::Zero(frames, layout::kFaceWidth);
  out.stance.resize(frames, 2);

  RootTrajectory root;
  root.heading.resize(frames);
  root.position.resize(frames);
  std::vector<std::array<FootState, 2>> feet(frames);
  const double duration = (frames - 1) / fps;

  Eigen::VectorXd face_row(layout::kFaceWidth);
  for (int t = 0; t < frames; ++t) {
    const double s = t / fps;
    BodyPlan plan;
    plan_body(c.body, c.body_side, style, s, plan);
    HandFrame hands;
    plan_hand(c.hand, c.hand_side, style, s, plan.rot, hands);
    plan_face(c.face, style, s, duration, plan.rot, face_row);

    const Matrix3d to_root = heading_rotation(plan.heading).transpose();
    for (int f = 0; f < 2; ++f) {
      const int hip_j = f == 0 ? kLeftHip : kRightHip;
      const Vector3d hip = Vector3d(0.0, plan.height, 0.0) + sk.offsets[hip_j];
      const Vector3d ankle = to_root * (plan.feet[f].ankle - plan.ground);
      const Matrix3d foot_rot = heading_rotation(plan.feet[f].heading - plan.heading);
      const Vector3d toe = ankle + foot_rot * chain.foot_offset;
      const Vector3d hint = 0.5 * (hip + ankle) + Vector3d(0.0, 0.0, 0.3);
      const LegSolution leg = solve_leg(hip, hint, ankle, toe, Matrix3d::Identity(), chain);
      if (leg.reach_clamped) ++out.clamped_ik_frames;
      plan.rot[hip_j] = leg.hip_local;
      plan.rot[f == 0 ? kLeftKnee : kRightKnee] = leg.knee_local;
      plan.rot[f == 0 ? kLeftAnkle : kRightAnkle] = leg.ankle_local;
    }
    feet[t] = plan.feet;

    const FkResult fk = forward_kinematics(plan.rot, plan.height, sk);
    for (int j = 0; j < kBodyJoints; ++j) {
      for (int k = 0; k < 3; ++k) out.body(t, layout::body_pos(j) + k) = static_cast<float>(fk.positions[j][k]);
      const Vector6d r6 = rot6d_from_matrix(plan.rot[j]);
      for (int k = 0; k < 6; ++k) out.body(t, layout::body_rot(j) + k) = static_cast<float>(r6[k]);
    }
    for (int j = 0; j < kHandJoints; ++j) {
      const Vector6d r6 = rot6d_from_matrix(hands[j]);
      for (int k = 0; k < 6; ++k) out.hand(t, layout::hand_rot(j) + k) = static_cast<float>(r6[k]);
    }
    out.face.row(t) = face_row.cast<float>().transpose();
    root.heading[t] = plan.heading;
    root.position[t] = Vector3d(plan.ground.x(), plan.height, plan.ground.z());
  }

  // Re-express the path so that it starts at the origin with zero heading, as decoding does.
  const double h0 = root.heading[0];
  const Vector3d g0(root.position[0].x(), 0.0, root.position[0].z());
  const Matrix3d undo = heading_rotation(-h0);
  for (int t = 0; t < frames; ++t) {
    root.heading[t] -= h0;
    const Vector3d p = root.position[t];
    root.position[t] = undo * Vector3d(p.x() - g0.x(), 0.0, p.z() - g0.z());
    root.position[t].y() = p.y();
  }
  encode_root(root, out.body);
  recompute_velocities(out.body);
  rederive_contacts(out.body, fps);

  for (int t = 0; t + 1 < frames; ++t) {
    for (int f = 0; f < 2; ++f) {
      const auto& a = feet[t][f];
      const auto& b = feet[t + 1][f];
      out.stance(t, f) = a.planted && b.planted && a.anchor == b.anchor ? 1 : 0;
    }
  }
  out.stance.row(frames - 1) = out.stance.row(frames - 2);
  return out;
}

std::vector<std::string> describe(const Composition& c) {
  const Phrases& b = lookup(body_phrases(), c.body);
  const Phrases& h = lookup(hand_phrases(), c.hand);
  const Phrases& f = lookup(face_phrases(), c.face);
  auto bp = [&](int k) { return fill(b.v[k], c.body_side); };
  auto hp = [&](int k) { return fill(h.v[k], c.hand_side); };
  return {
      "a person " + bp(0) + " while " + hp(0) + " " + f.v[0],
      "someone " + bp(1) + " and " + hp(1) + ", " + f.v[1],
      "the person " + bp(2) + ", " + hp(2) + ", " + f.v[2],
  };
}

std::vector<std::string> paraphrase(const std::string& text, int count) {
  static const std::array<std::pair<std::string, std::string>, 3> kSubjects = {
      std::pair<std::string, std::string>{"a person ", "someone "},
      {"a person ", "the person "},
      {"a man ", "a person "},
  };
  std::vector<std::string> out{text};
  std::vector<std::string> candidates;
  for (const auto& [from, to] : kSubjects) {
    if (text.rfind(from, 0) == 0) candidates.push_back(to + text.substr(from.size()));
  }
  candidates.push_back("a person " + text);
  candidates.push_back("in this clip, " + text);
  candidates.push_back(text + ", as described");
  for (const auto& cand : candidates) {
    if (static_cast<int>(out.size()) >= count) break;
    if (std::find(out.begin(), out.end(), cand) == out.end()) out.push_back(cand);
  }
  while (static_cast<int>(out.size()) < count) out.push_back(out.back() + ".");
  out.resize(count);
  return out;
}

MotionClip inject_jitter(const MotionClip& clip, double amplitude, std::uint64_t seed) {
  if (amplitude <= 0.0) return clip;
  Rng rng(seed);
  FrameMatrix body = clip.body();
  RootTrajectory root = integrate_root(body);
  for (int t = 0; t < clip.frames(); ++t) {
    root.position[t].x() += amplitude * rng.normal();
    root.position[t].z() += amplitude * rng.normal();
    root.position[t].y() += amplitude * rng.normal();
  }
  encode_root(root, body);
  for (int t = 0; t < clip.frames(); ++t) {
    for (int c = layout::kBodyPos; c < layout::kBodyVel; ++c) body(t, c) += static_cast<float>(amplitude * rng.normal());
    for (int c = layout::kBodyRot; c < layout::kContacts; ++c) {
      body(t, c) += static_cast<float>(4.0 * amplitude * rng.normal());
    }
  }
  recompute_velocities(body);
  MotionClip out = clip.with_channels(Modality::kBody, std::move(body));
  if (clip.hand()) {
    FrameMatrix h = *clip.hand();
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] += static_cast<float>(4.0 * amplitude * rng.normal());
    out = out.with_channels(Modality::kHand, std::move(h));
  }
  if (clip.face()) {
    FrameMatrix f = *clip.face();
    for (int t = 0; t < clip.frames(); ++t) {
      for (int c = 0; c < layout::kFaceWidth; ++c) {
        const double scale = c < layout::kExpression ? 4.0 : 10.0;
        f(t, c) += static_cast<float>(scale * amplitude * rng.normal());
      }
    }
    out = out.with_channels(Modality::kFace, std::move(f));
  }
  return out;
}

SyntheticDataset make_synthetic_dataset(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<std::string> bodies;
  std::vector<std::string> hands{"none"};
  std::vector<std::string> faces{"neutral"};
  for (const auto& name : spec.vocabulary) {
    switch (find_generator(name).part) {
      case Part::kBody: bodies.push_back(name); break;
      case Part::kHand: hands.push_back(name); break;
      case Part::kFace: faces.push_back(name); break;
    }
  }

  SyntheticDataset out;
  Rng rng(derive_seed(spec.seed, 1));
  for (int i = 0; i < spec.clips; ++i) {
    ClipTruth truth;
    char id[32];
    std::snprintf(id, sizeof(id), "syn_%05d", i);
    truth.id = id;
    Composition& c = truth.composition;
    c.body = bodies[rng.below(bodies.size())];
    c.body_side = static_cast<Side>(rng.below(2));
    c.hand = hands[rng.below(hands.size())];
    c.hand_side = static_cast<Side>(rng.below(2));
    c.face = faces[rng.below(faces.size())];
    if (!find_generator(c.body).sided) c.body_side = Side::kLeft;
    if (c.hand == "none" || !find_generator(c.hand).sided) c.hand_side = Side::kLeft;
    truth.style.tempo = rng.uniform(0.8, 1.25);
    truth.style.energy = rng.uniform(0.6, 1.0);
    const int frames = rng.range(spec.min_frames, spec.max_frames);
    const bool keep_hand = rng.bernoulli(spec.p_hand);
    const bool keep_face = rng.bernoulli(spec.p_face);
    truth.jittered = spec.jitter_amplitude > 0.0 && rng.bernoulli(spec.jitter_fraction);
    const std::uint64_t jitter_seed = rng.bits();

    truth.body_class = class_index(c.body, Part::kBody);
    truth.hand_class = c.hand == "none" ? -1 : class_index(c.hand, Part::kHand);
    truth.face_class = c.face == "neutral" ? -1 : class_index(c.face, Part::kFace);

    SynthesizedMotion m = synthesize(c, truth.style, frames, spec.fps);
    truth.stance = m.stance;
    MotionClip clip(truth.id, spec.fps, std::move(m.body),
                    keep_hand ? std::optional<FrameMatrix>(std::move(m.hand)) : std::nullopt,
                    keep_face ? std::optional<FrameMatrix>(std::move(m.face)) : std::nullopt,
                    describe(c));
    if (truth.jittered) clip = inject_jitter(clip, spec.jitter_amplitude, jitter_seed);
    out.dataset.clips.push_back(std::move(clip));
    out.truth.push_back(std::move(truth));
  }

  auto& splits = out.dataset.splits;
  splits = make_split(out.dataset.size(), derive_seed(spec.seed, 2));
  // Move test clips whose body class is missing from train into train, swapping
  // with a train clip of a class that is represented at least twice.
  const int n_classes = static_cast<int>(generator_catalog().size());
  std::vector<int> train_count(n_classes, 0);
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == Split::kTrain) ++train_count[out.truth[i].body_class];
  }
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] != Split::kTest || train_count[out.truth[i].body_class] > 0) continue;
    for (std::size_t k = 0; k < splits.size(); ++k) {
      if (splits[k] == Split::kTrain && train_count[out.truth[k].body_class] >= 2) {
        std::swap(splits[i], splits[k]);
        --train_count[out.truth[k].body_class];
        ++train_count[out.truth[i].body_class];
        break;
      }
    }
  }
  out.dataset.stats = compute_normalization(out.dataset);
  return out;
}

}  // namespace t2mx::prep
