#pragma once

// Extractor directory written by train_eval_extractors:
//   config.json                extractor settings
//   weights.{bin,json}         text and motion networks
//   normalization.json         channel statistics applied before the motion networks

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "t2mx/core/clip.hpp"
#include "t2mx/eval/metrics.hpp"
#include "t2mx/gpt/text.hpp"

namespace t2mx::eval {

struct ExtractorConfig {
  int feature_width = 32;
  int hidden = 64;
  int text_bins = 512;
  int steps = 600;
  int batch = 32;
  double lr = 1e-3;
  double temperature = 0.1;  // InfoNCE temperature on cosine similarity
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json extractor_config_to_json(const ExtractorConfig& c);
ExtractorConfig extractor_config_from_json(const nlohmann::json& j);

/// Hashed bag of words followed by a two-layer MLP; unit-norm output.
class TextFeatureNetImpl : public torch::nn::Module {
 public:
  TextFeatureNetImpl(int bins, int hidden, int width);
  torch::Tensor forward(const torch::Tensor& bags);

 private:
  torch::nn::Linear fc1_{nullptr}, fc2_{nullptr};
};
TORCH_MODULE(TextFeatureNet);

/// Temporal convolutions with masked mean pooling; unit-norm output.
class MotionFeatureNetImpl : public torch::nn::Module {
 public:
  MotionFeatureNetImpl(int channels, int hidden, int width);
  /// `x` B x T x channels (normalized), `frames` the valid length of each row.
  torch::Tensor forward(const torch::Tensor& x, const std::vector<int>& frames);

 private:
  torch::nn::Conv1d c1_{nullptr}, c2_{nullptr}, c3_{nullptr};
  torch::nn::Linear out_{nullptr};
};
TORCH_MODULE(MotionFeatureNet);

class EvalNetsImpl : public torch::nn::Module {
 public:
  EvalNetsImpl(const ExtractorConfig& c);
  TextFeatureNet text{nullptr};
  std::array<MotionFeatureNet, 3> motion{MotionFeatureNet{nullptr}, MotionFeatureNet{nullptr},
                                         MotionFeatureNet{nullptr}};
};
TORCH_MODULE(EvalNets);

/// Frozen text and per-modality motion feature networks sharing one space.
class EvalExtractors {
 public:
  static EvalExtractors load(const std::filesystem::path& dir);

  Features text_features(const std::vector<std::string>& texts) const;
  /// Raw (unnormalized) channels of one modality per clip. Throws kContract
  /// when a clip lacks the modality.
  Features motion_features(core::Modality m, const std::vector<core::MotionClip>& clips) const;

  int width() const { return config_.feature_width; }
  const ExtractorConfig& config() const { return config_; }
  /// Content hash of the extractor directory.
  const std::string& hash() const { return hash_; }

 private:
  ExtractorConfig config_;
  mutable EvalNets nets_{nullptr};
  gpt::HashedBagOfWords encoder_{512};
  core::NormalizationStats stats_;
  std::string hash_;
};

struct ExtractorTrainResult {
  int steps_done = 0;
  std::vector<double> trace;  // total loss per step
};

/// Contrastive training on the training split: every text pairs with the
/// modalities its clip carries and every two annotated modalities of a clip
/// pair with each other. Throws kDegenerateBatch for fewer than two training clips.
ExtractorTrainResult train_eval_extractors(const core::MotionDataset& dataset, const ExtractorConfig& config,
                                           const std::filesystem::path& out_dir);

}  // namespace t2mx::eval
