#pragma once

// Checkpoint directory written by train_gpt:
//   config.json                {model, train, consistency, text_encoder}
//   experts.json               relative path and content hash of each expert used for tokenization
//   weights.{bin,json}         generator parameters and buffers
//   extractors.{bin,json}      joint-space extractors (consistency enabled only)
//   optimizer.{bin,json}       AdamW moments
//   state.json                 step counter and RNG scheme
//   loss_trace.csv             one row per step

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2mx/consistency/consistency.hpp"
#include "t2mx/core/clip.hpp"
#include "t2mx/core/random.hpp"
#include "t2mx/gpt/loss.hpp"
#include "t2mx/gpt/model.hpp"
#include "t2mx/gpt/text.hpp"
#include "t2mx/vq/expert.hpp"

namespace t2mx::gpt {

struct GptTrainConfig {
  int steps = 2000;
  int batch = 32;
  double lr = 2e-4;
  double weight_decay = 0.0;
  double beta1 = 0.5;
  double beta2 = 0.99;
  std::vector<int> lr_milestones;  // lr *= lr_gamma at each listed step
  double lr_gamma = 0.1;
  double eta1 = 1.0;  // hand cross-entropy weight
  double eta2 = 1.0;  // face cross-entropy weight
  int checkpoint_every = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json gpt_train_to_json(const GptTrainConfig& c);
GptTrainConfig gpt_train_from_json(const nlohmann::json& j);

struct GptSettings {
  GptConfig model;
  GptTrainConfig train;
  consistency::ConsistencyConfig consistency;
  nlohmann::json text_encoder = {{"kind", "hashed"}, {"bins", 512}};
};

using ExpertSet = std::array<std::shared_ptr<const vq::VqExpert>, 3>;

ExpertSet load_experts(const std::array<std::filesystem::path, 3>& dirs);

/// One clip's token streams; unannotated modalities hold no tokens.
struct TokenizedClip {
  std::string id;
  std::vector<std::string> texts;
  std::array<std::vector<int>, 3> tokens;
  core::ModalityMask mask{};
};

/// Encodes every clip once, truncating streams to `max_tokens`. Throws
/// kConfig when the experts disagree on the temporal downsampling factor.
std::vector<TokenizedClip> tokenize_clips(const std::vector<core::MotionClip>& clips, const ExpertSet& experts,
                                          int max_tokens);

struct TrainingBatch {
  torch::Tensor text;         // B x text_features
  torch::Tensor body_prefix;  // B x (L − 1), End as padding
  GptTargets targets;         // L = longest stream + 1
  torch::Tensor valid;        // B x L supervised positions
};

/// Texts are drawn with `text_rng` when given, else the first description is used.
TrainingBatch assemble_batch(const std::vector<TokenizedClip>& clips, const std::vector<std::size_t>& pick,
                             const TextEncoder& encoder, const GptConfig& config, core::Rng* text_rng);

struct GptStepLoss {
  int step = 0;
  double total = 0, gpt = 0, body = 0, hand = 0, face = 0, consistency = 0;
};

struct GptTrainResult {
  int steps_done = 0;
  bool finished = false;
  std::vector<GptStepLoss> trace;
};

struct GptRunOptions {
  bool resume = false;
  int stop_after = -1;
};

/// Checks the configured code counts and body code width against the experts
/// and the text feature width against the encoder; throws kConfig on mismatch.
void check_compatibility(const GptSettings& settings, const ExpertSet& experts, const TextEncoder& encoder);

/// Trains on the training split. Deterministic in `settings.train.seed`.
GptTrainResult train_gpt(const core::MotionDataset& dataset, const std::array<std::filesystem::path, 3>& expert_dirs,
                         const GptSettings& settings, const std::filesystem::path& out_dir,
                         const GptRunOptions& options = {});

/// A trained generator with its text encoder and experts, ready for inference.
struct GptCheckpoint {
  GptSettings settings;
  MultiIndexGpt model{nullptr};
  std::shared_ptr<const TextEncoder> text;
  ExpertSet experts;
  std::filesystem::path dir;

  /// Throws kMissingDependency when the directory or a referenced expert is
  /// absent and kConfig when an expert's content hash changed.
  static GptCheckpoint load(const std::filesystem::path& dir);
};

}  // namespace t2mx::gpt
