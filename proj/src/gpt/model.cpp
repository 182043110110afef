#include "t2mx/gpt/model.hpp"

#include <cmath>
#include <limits>

#include "t2mx/core/config.hpp"
#include "t2mx/core/error.hpp"

namespace t2mx::gpt {

void GptConfig::validate() const {
  for (int k : codes) require(k >= 2, ErrorCode::kConfig, "gpt.codes entries must be >= 2");
  require(body_code_width >= 1 && text_features >= 1, ErrorCode::kConfig, "gpt widths must be positive");
  require(d_model >= 1 && heads >= 1 && d_model % heads == 0, ErrorCode::kConfig,
          "gpt.d_model must be a positive multiple of gpt.heads");
  require(base_layers >= 1 && branch_layers >= 0 && mlp_ratio >= 1, ErrorCode::kConfig, "gpt layer counts");
  require(max_tokens >= 1 && max_tokens <= 128, ErrorCode::kConfig, "gpt.max_tokens must be in [1, 128]");
  require(dropout >= 0.0 && dropout < 1.0, ErrorCode::kConfig, "gpt.dropout must be in [0, 1)");
}

nlohmann::json gpt_config_to_json(const GptConfig& c) {
  return {{"codes", c.codes},
          {"body_code_width", c.body_code_width},
          {"text_features", c.text_features},
          {"d_model", c.d_model},
          {"heads", c.heads},
          {"base_layers", c.base_layers},
          {"branch_layers", c.branch_layers},
          {"mlp_ratio", c.mlp_ratio},
          {"max_tokens", c.max_tokens},
          {"dropout", c.dropout}};
}

GptConfig gpt_config_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "gpt");
  GptConfig c;
  r.read("codes", c.codes);
  r.read("body_code_width", c.body_code_width);
  r.read("text_features", c.text_features);
  r.read("d_model", c.d_model);
  r.read("heads", c.heads);
  r.read("base_layers", c.base_layers);
  r.read("branch_layers", c.branch_layers);
  r.read("mlp_ratio", c.mlp_ratio);
  r.read("max_tokens", c.max_tokens);
  r.read("dropout", c.dropout);
  r.finish();
  c.validate();
  return c;
}

torch::Tensor causal_mask(std::int64_t t) {
  return torch::ones({t, t}, torch::kBool).tril();
}

torch::Tensor causal_attention(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v,
                               const torch::Tensor& allowed) {
  require(q.dim() >= 2 && q.sizes() == k.sizes() && k.sizes() == v.sizes(), ErrorCode::kShape,
          "attention: q, k, v shapes differ");
  const std::int64_t t = q.size(-2);
  require(allowed.dim() == 2 && allowed.size(0) == t && allowed.size(1) == t, ErrorCode::kShape,
          "attention: mask must be " + std::to_string(t) + " x " + std::to_string(t));
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.size(-1)));
  torch::Tensor scores = torch::matmul(q, k.transpose(-2, -1)) * scale;
  scores = scores.masked_fill(allowed.logical_not(), -std::numeric_limits<double>::infinity());
  return torch::matmul(torch::softmax(scores, -1), v);
}

SelfAttentionImpl::SelfAttentionImpl(int d_model, int heads) : heads_(heads) {
  qkv_ = register_module("qkv", torch::nn::Linear(d_model, 3 * d_model));
  proj_ = register_module("proj", torch::nn::Linear(d_model, d_model));
}

torch::Tensor SelfAttentionImpl::forward(const torch::Tensor& x, const torch::Tensor& allowed) {
  const std::int64_t b = x.size(0);
  const std::int64_t t = x.size(1);
  const std::int64_t d = x.size(2);
  const std::int64_t h = heads_;
  auto parts = qkv_(x).view({b, t, 3, h, d / h}).permute({2, 0, 3, 1, 4});
  const torch::Tensor ctx = causal_attention(parts[0], parts[1], parts[2], allowed);
  return proj_(ctx.transpose(1, 2).reshape({b, t, d}));
}

BlockImpl::BlockImpl(int d_model, int heads, int mlp_ratio, double dropout) {
  ln1_ = register_module("ln1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({d_model})));
  ln2_ = register_module("ln2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({d_model})));
  attn_ = register_module("attn", SelfAttention(d_model, heads));
  fc1_ = register_module("fc1", torch::nn::Linear(d_model, mlp_ratio * d_model));
  fc2_ = register_module("fc2", torch::nn::Linear(mlp_ratio * d_model, d_model));
  drop_ = register_module("drop", torch::nn::Dropout(dropout));
}

torch::Tensor BlockImpl::forward(const torch::Tensor& x, const torch::Tensor& allowed) {
  torch::Tensor y = x + drop_(attn_(ln1_(x), allowed));
  return y + drop_(fc2_(torch::gelu(fc1_(ln2_(y)))));
}

BranchImpl::BranchImpl(const GptConfig& c, int classes) {
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  for (int i = 0; i < c.branch_layers; ++i) blocks_->push_back(Block(c.d_model, c.heads, c.mlp_ratio, c.dropout));
  ln_ = register_module("ln", torch::nn::LayerNorm(torch::nn::LayerNormOptions({c.d_model})));
  head_ = register_module("head", torch::nn::Linear(c.d_model, classes));
}

torch::Tensor BranchImpl::forward(const torch::Tensor& x, const torch::Tensor& allowed) {
  torch::Tensor y = x;
  for (const auto& m : *blocks_) y = m->as<Block>()->forward(y, allowed);
  return head_(ln_(y));
}

MultiIndexGptImpl::MultiIndexGptImpl(const GptConfig& c, const torch::Tensor& body_codebook) : config_(c) {
  c.validate();
  require(body_codebook.dim() == 2 && body_codebook.size(0) == c.codes[0] &&
              body_codebook.size(1) == c.body_code_width,
          ErrorCode::kConfig,
          "body codebook is " + std::to_string(body_codebook.size(0)) + " x " +
              std::to_string(body_codebook.size(1)) + ", model expects " + std::to_string(c.codes[0]) + " x " +
              std::to_string(c.body_code_width));
  codebook_ = register_buffer("body_codebook", body_codebook.detach().to(torch::kFloat32).clone());
  end_embedding_ = register_parameter("end_embedding", torch::zeros({1, c.body_code_width}));
  text_proj_ = register_module("text_proj", torch::nn::Linear(c.text_features, c.d_model));
  token_proj_ = register_module("token_proj", torch::nn::Linear(c.body_code_width, c.d_model));
  positions_ = register_parameter("positions", torch::randn({c.max_tokens + 1, c.d_model}) * 0.02);
  base_ = register_module("base", torch::nn::ModuleList());
  for (int i = 0; i < c.base_layers; ++i) base_->push_back(Block(c.d_model, c.heads, c.mlp_ratio, c.dropout));
  const char* names[3] = {"branch_body", "branch_hand", "branch_face"};
  for (int p = 0; p < 3; ++p) {
    branches_[static_cast<std::size_t>(p)] = register_module(names[p], Branch(c, c.codes[static_cast<std::size_t>(p)] + 1));
  }
}

GptOutput MultiIndexGptImpl::forward(const torch::Tensor& text, const torch::Tensor& body_prefix) {
  require(text.dim() == 2 && text.size(1) == config_.text_features, ErrorCode::kShape,
          "gpt text features must be B x " + std::to_string(config_.text_features));
  require(body_prefix.dim() == 2 && body_prefix.size(0) == text.size(0), ErrorCode::kShape,
          "gpt body prefix must be B x T");
  const std::int64_t t = body_prefix.size(1);
  require(t <= config_.max_tokens, ErrorCode::kLength,
          "body prefix of " + std::to_string(t) + " tokens exceeds max_tokens " + std::to_string(config_.max_tokens));
  const torch::Tensor table = torch::cat({codebook_.to(end_embedding_.scalar_type()), end_embedding_}, 0);
  const torch::Tensor tok = token_proj_(table.index_select(0, body_prefix.reshape({-1})).view({text.size(0), t, config_.body_code_width}));
  torch::Tensor x = torch::cat({text_proj_(text).unsqueeze(1), tok}, 1);
  x = x + positions_.slice(0, 0, t + 1).unsqueeze(0);
  const torch::Tensor allowed = causal_mask(t + 1);
  for (const auto& m : *base_) x = m->as<Block>()->forward(x, allowed);
  GptOutput out;
  for (std::size_t p = 0; p < 3; ++p) out.logits[p] = branches_[p]->forward(x, allowed);
  return out;
}

std::vector<torch::Tensor> MultiIndexGptImpl::branch_parameters(int modality) const {
  return branches_[static_cast<std::size_t>(modality)]->parameters();
}

}  // namespace t2mx::gpt
