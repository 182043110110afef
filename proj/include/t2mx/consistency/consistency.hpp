#pragma once

#include <array>

#include <json.hpp>
#include <torch/torch.h>

namespace t2mx::consistency {

struct ConsistencyConfig {
  bool enabled = false;
  std::array<double, 3> lambda = {1.0, 1.0, 1.0};  // body-hand, body-face, hand-face
  double margin = 10.0;
  int d_joint = 64;

  void validate() const;
};

nlohmann::json consistency_to_json(const ConsistencyConfig& c);
ConsistencyConfig consistency_from_json(const nlohmann::json& j);

/// GRU over one-hot(token) ⊕ probabilities, followed by a linear map into the
/// shared joint space.
class JointSpaceExtractorImpl : public torch::nn::Module {
 public:
  JointSpaceExtractorImpl(int classes, int d_joint);
  /// `tokens` B x L int64 in [0, classes); `probs` B x L x classes with rows
  /// summing to 1 within 1e-5 (kInvalidDistribution otherwise). Returns B x L x d_joint.
  torch::Tensor forward(const torch::Tensor& tokens, const torch::Tensor& probs);
  int classes() const { return classes_; }

 private:
  int classes_;
  torch::nn::GRU gru_{nullptr};
  torch::nn::Linear out_{nullptr};
};
TORCH_MODULE(JointSpaceExtractor);

/// One extractor per modality; `classes[p]` is K_p + 1.
class JointSpaceExtractorsImpl : public torch::nn::Module {
 public:
  JointSpaceExtractorsImpl(const std::array<int, 3>& classes, int d_joint);
  JointSpaceExtractor& at(int modality) { return extractors_[static_cast<std::size_t>(modality)]; }

 private:
  std::array<JointSpaceExtractor, 3> extractors_{JointSpaceExtractor{nullptr}, JointSpaceExtractor{nullptr},
                                                 JointSpaceExtractor{nullptr}};
};
TORCH_MODULE(JointSpaceExtractors);

torch::Tensor extract_features(JointSpaceExtractor& extractor, const torch::Tensor& tokens,
                               const torch::Tensor& probs);

/// mean_i [ ‖a_i − b_i‖² + Σ_j max(0, m − ‖a_i − n_j‖)² / |neg_i| ] where the
/// negatives of row i are the rows j of `negatives` with negative_mask[i][j]
/// (all rows when the mask is undefined). Throws kDegenerateBatch when some
/// row has no negative and kShape on mismatched inputs.
torch::Tensor contrastive_loss(const torch::Tensor& e_a, const torch::Tensor& e_b, const torch::Tensor& negatives,
                               double margin, const torch::Tensor& negative_mask = {});

struct ConsistencyTerms {
  torch::Tensor total;
  std::array<torch::Tensor, 3> pair;  // weighted body-hand, body-face, hand-face contributions
};

/// Pair (a, b) compares side_a[a] with side_b[b] per aligned position, over
/// samples annotated with both modalities; negatives are the other such
/// samples' side_b[b] rows. `valid` is B x L. A pair with zero weight or fewer
/// than two annotated samples contributes exactly 0. Throws kAlignment when
/// the embedding sequences differ in shape.
ConsistencyTerms consistency_loss(const std::array<torch::Tensor, 3>& side_a,
                                  const std::array<torch::Tensor, 3>& side_b, const torch::Tensor& valid,
                                  const std::array<torch::Tensor, 3>& annotated, const ConsistencyConfig& config);

/// L_GPT unchanged when `consistency` is undefined, otherwise L_GPT + consistency.
torch::Tensor final_loss(const torch::Tensor& gpt_loss, const torch::Tensor& consistency);

}  // namespace t2mx::consistency
