#pragma once

#include <array>

#include <json.hpp>
#include <torch/torch.h>

namespace t2mx::gpt {

struct GptConfig {
  std::array<int, 3> codes = {64, 64, 64};  // K per modality (body, hand, face); End = K
  int body_code_width = 32;
  int text_features = 512;
  int d_model = 64;
  int heads = 4;
  int base_layers = 2;
  int branch_layers = 1;
  int mlp_ratio = 4;
  int max_tokens = 128;
  double dropout = 0.0;

  int end_id(int modality) const { return codes[static_cast<std::size_t>(modality)]; }
  void validate() const;
};

nlohmann::json gpt_config_to_json(const GptConfig& c);
GptConfig gpt_config_from_json(const nlohmann::json& j);

/// softmax(QKᵀ/√d_k + mask)V with disallowed positions at −∞. `q`, `k`, `v`
/// are (..., T, d_k); `allowed` is a T x T bool matrix, true where attention
/// is permitted. Throws kShape on mismatched lengths.
torch::Tensor causal_attention(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v,
                               const torch::Tensor& allowed);

/// Lower-triangular T x T bool matrix.
torch::Tensor causal_mask(std::int64_t t);

class SelfAttentionImpl : public torch::nn::Module {
 public:
  SelfAttentionImpl(int d_model, int heads);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& allowed);

 private:
  int heads_;
  torch::nn::Linear qkv_{nullptr};
  torch::nn::Linear proj_{nullptr};
};
TORCH_MODULE(SelfAttention);

/// Pre-norm transformer block.
class BlockImpl : public torch::nn::Module {
 public:
  BlockImpl(int d_model, int heads, int mlp_ratio, double dropout);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& allowed);

 private:
  torch::nn::LayerNorm ln1_{nullptr};
  torch::nn::LayerNorm ln2_{nullptr};
  SelfAttention attn_{nullptr};
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
  torch::nn::Dropout drop_{nullptr};
};
TORCH_MODULE(Block);

class BranchImpl : public torch::nn::Module {
 public:
  BranchImpl(const GptConfig& c, int classes);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& allowed);

 private:
  torch::nn::ModuleList blocks_{nullptr};
  torch::nn::LayerNorm ln_{nullptr};
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(Branch);

struct GptOutput {
  std::array<torch::Tensor, 3> logits;  // B x (T+1) x (K_p + 1)
};

/// Shared causal base over [text, body tokens...] with one head stack per modality.
/// Position 0 carries the projected text features; position t > 0 carries the
/// embedding of body token t. Output position t predicts token t+1.
class MultiIndexGptImpl : public torch::nn::Module {
 public:
  /// `body_codebook` (K_body x body_code_width) is copied into a frozen buffer.
  MultiIndexGptImpl(const GptConfig& c, const torch::Tensor& body_codebook);

  const GptConfig& config() const { return config_; }
  /// `text` is B x text_features; `body_prefix` is B x T int64 with ids in
  /// [0, K_body] (End doubles as padding). Throws kLength when T > max_tokens.
  GptOutput forward(const torch::Tensor& text, const torch::Tensor& body_prefix);

  /// Parameters of one branch stack (for gradient audits).
  std::vector<torch::Tensor> branch_parameters(int modality) const;

 private:
  GptConfig config_;
  torch::Tensor codebook_;  // frozen K_body x d_c
  torch::Tensor end_embedding_;  // learned row used for End and padding
  torch::nn::Linear text_proj_{nullptr};
  torch::nn::Linear token_proj_{nullptr};
  torch::Tensor positions_;
  torch::nn::ModuleList base_{nullptr};
  std::array<Branch, 3> branches_{Branch{nullptr}, Branch{nullptr}, Branch{nullptr}};
};
TORCH_MODULE(MultiIndexGpt);

}  // namespace t2mx::gpt
