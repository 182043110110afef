#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "t2mx/core/clip.hpp"

namespace t2mx::prep {

enum class Part { kBody, kHand, kFace };
enum class Side : int { kLeft = 0, kRight = 1 };

/// One named procedural generator.
struct GeneratorInfo {
  std::string name;
  Part part;
  bool sided;  // takes a left/right argument
};

/// All generators known to the synthesizer, body first, then hand, then face.
const std::vector<GeneratorInfo>& generator_catalog();
const GeneratorInfo& find_generator(const std::string& name);  // kInvalidSpec when unknown
/// Full catalog names, usable as a vocabulary.
std::vector<std::string> default_vocabulary();

struct SyntheticSpec {
  int clips = 200;
  int min_frames = 48;
  int max_frames = 96;
  double fps = 30.0;
  std::vector<std::string> vocabulary = default_vocabulary();
  double p_body = 1.0;
  double p_hand = 0.6;
  double p_face = 0.6;
  double jitter_amplitude = 0.0;  // noise std (m for positions; scaled for other channels)
  double jitter_fraction = 0.5;   // share of clips that receive jitter when amplitude > 0
  std::uint64_t seed = 0;

  /// Throws kInvalidSpec.
  void validate() const;
};

nlohmann::json spec_to_json(const SyntheticSpec& spec);
/// Missing keys keep their defaults; unknown keys raise kConfig.
SyntheticSpec spec_from_json(const nlohmann::json& j);

/// What a clip shows. "none" and "neutral" stand for no hand action and a
/// neutral face.
struct Composition {
  std::string body = "stand";
  Side body_side = Side::kLeft;
  std::string hand = "none";
  Side hand_side = Side::kLeft;
  std::string face = "neutral";
};

/// Hidden per-clip latents shared by all modalities.
struct MotionStyle {
  double tempo = 1.0;   // frequency multiplier
  double energy = 0.8;  // amplitude multiplier
};

struct SynthesizedMotion {
  core::FrameMatrix body;
  core::FrameMatrix hand;
  core::FrameMatrix face;
  /// Ground-truth stance per frame (left foot, right foot): the foot is held
  /// fixed between this frame and the next. The last row copies the previous one.
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 2> stance;
  int clamped_ik_frames = 0;
};

/// Renders one composition. Clean output: contacts come from the rendered
/// positions, no jitter.
SynthesizedMotion synthesize(const Composition& composition, const MotionStyle& style, int frames,
                             double fps);

/// Three deterministic paraphrases naming the composed motions.
std::vector<std::string> describe(const Composition& composition);

/// Rule-based paraphrases of a free-form description (the hook for text
/// expansion of external corpora). Always returns `count` strings, the first
/// being the input.
std::vector<std::string> paraphrase(const std::string& text, int count = 3);

/// Class labels recorded per clip.
struct ClipTruth {
  std::string id;
  Composition composition;
  MotionStyle style;
  int body_class = 0;   // index into the body generators of the catalog
  int hand_class = -1;  // -1 for none
  int face_class = -1;  // -1 for neutral
  bool jittered = false;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 2> stance;
};

struct SyntheticDataset {
  core::MotionDataset dataset;  // splits and training-split normalization filled in
  std::vector<ClipTruth> truth;
};

/// Deterministic in spec.seed. Every test-split clip's body class also occurs
/// in the training split.
SyntheticDataset make_synthetic_dataset(const SyntheticSpec& spec);

/// Adds zero-mean noise to every continuous channel (and the world root path).
/// Contacts are left as they were.
core::MotionClip inject_jitter(const core::MotionClip& clip, double amplitude, std::uint64_t seed);

}  // namespace t2mx::prep
