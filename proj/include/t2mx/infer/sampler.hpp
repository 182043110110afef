#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "t2mx/gpt/model.hpp"

namespace t2mx::infer {

enum class SamplingMode { kGreedy, kTopK, kTemperature };

std::string_view sampling_mode_name(SamplingMode m);
/// "greedy", "top-k" or "temperature"; kConfig otherwise.
SamplingMode sampling_mode_from_name(std::string_view name);

struct SamplingConfig {
  SamplingMode mode = SamplingMode::kGreedy;
  int top_k = 10;
  double temperature = 1.0;

  void validate() const;
};

/// Next-token logits for the three branches, driven by the body tokens so far.
class LogitSource {
 public:
  virtual ~LogitSource() = default;
  /// K_p per modality; the End id of modality p is K_p.
  virtual std::array<int, 3> codes() const = 0;
  virtual int max_tokens() const = 0;
  /// Logit vectors of length K_p + 1.
  virtual std::array<std::vector<double>, 3> next(const std::vector<int>& body_prefix) = 0;
};

/// Adapter over a frozen generator and one text feature vector.
class GptLogitSource final : public LogitSource {
 public:
  GptLogitSource(gpt::MultiIndexGpt model, torch::Tensor text_features);
  std::array<int, 3> codes() const override { return model_->config().codes; }
  int max_tokens() const override { return model_->config().max_tokens; }
  std::array<std::vector<double>, 3> next(const std::vector<int>& body_prefix) override;

 private:
  gpt::MultiIndexGpt model_;
  torch::Tensor text_;  // 1 x F
};

struct SamplerOptions {
  SamplingConfig sampling;
  std::uint64_t seed = 0;
  int max_tokens = 128;             // capped at the source's maximum
  bool consistency_sampler = true;  // replace premature hand/face End tokens
};

/// A hand/face End selected while the body continued, and its substitute.
struct ReplacementEvent {
  int step = 0;  // 1-based token position
  int branch = 0;
  double end_probability = 0.0;
  int chosen_token = 0;
  double chosen_probability = 0.0;
  int chosen_rank = 0;  // 1-based rank of the substitute under the step distribution
};

struct SamplerStep {
  int step = 0;
  std::array<int, 3> tokens{};         // −1 for a branch that already ended
  std::array<double, 3> probability{};  // probability of the emitted token
};

struct SampledTokens {
  /// Emitted ids per branch; End closes a stream when the body ended.
  std::array<std::vector<int>, 3> tokens;
  bool body_ended = false;
  std::vector<SamplerStep> trace;
  std::vector<ReplacementEvent> replacements;
};

/// Autoregressive loop driven by the body branch. It stops when the body emits
/// End (every stream is then closed with End) or after max_tokens steps. With
/// the consistency sampler on, a hand/face End selected before the body ends
/// is replaced by the second-ranked token of that step's distribution (the
/// top-ranked one when End itself ranks second), so the three streams always
/// have equal length. Ranking ties go to the lower id.
SampledTokens sample_tokens(LogitSource& source, const SamplerOptions& options);

nlohmann::json audit_to_json(const SampledTokens& sampled);

/// Sampling distribution of one logit vector under the configured mode.
std::vector<double> step_distribution(const std::vector<double>& logits, const SamplingConfig& config);

/// Token ids ordered by decreasing logit, ties by increasing id.
std::vector<int> rank_tokens(const std::vector<double>& logits);

}  // namespace t2mx::infer
