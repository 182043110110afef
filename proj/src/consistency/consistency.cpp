#include "t2mx/consistency/consistency.hpp"

#include "t2mx/core/config.hpp"
#include "t2mx/core/error.hpp"

namespace t2mx::consistency {

namespace {

constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

torch::Tensor safe_distance(const torch::Tensor& diff) {
  const torch::Tensor sq = diff.pow(2).sum(-1);
  const torch::Tensor positive = sq > 0;
  return torch::where(positive, torch::where(positive, sq, torch::ones_like(sq)).sqrt(), torch::zeros_like(sq));
}

}  // namespace

void ConsistencyConfig::validate() const {
  for (double l : lambda) require(l >= 0.0, ErrorCode::kConfig, "consistency.lambda must be non-negative");
  require(margin > 0.0, ErrorCode::kConfig, "consistency.margin must be positive");
  require(d_joint >= 1, ErrorCode::kConfig, "consistency.d_joint must be positive");
}

nlohmann::json consistency_to_json(const ConsistencyConfig& c) {
  return {{"enabled", c.enabled}, {"lambda", c.lambda}, {"margin", c.margin}, {"d_joint", c.d_joint}};
}

ConsistencyConfig consistency_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "consistency");
  ConsistencyConfig c;
  r.read("enabled", c.enabled);
  r.read("lambda", c.lambda);
  r.read("margin", c.margin);
  r.read("d_joint", c.d_joint);
  r.finish();
  c.validate();
  return c;
}

JointSpaceExtractorImpl::JointSpaceExtractorImpl(int classes, int d_joint) : classes_(classes) {
  gru_ = register_module("gru", torch::nn::GRU(torch::nn::GRUOptions(2 * classes, d_joint).batch_first(true)));
  out_ = register_module("out", torch::nn::Linear(d_joint, d_joint));
}

torch::Tensor JointSpaceExtractorImpl::forward(const torch::Tensor& tokens, const torch::Tensor& probs) {
  require(tokens.dim() == 2 && probs.dim() == 3 && probs.size(0) == tokens.size(0) &&
              probs.size(1) == tokens.size(1) && probs.size(2) == classes_,
          ErrorCode::kShape, "extractor expects B x L tokens and B x L x " + std::to_string(classes_) + " probs");
  {
    torch::NoGradGuard guard;
    const double err = probs.numel() == 0 ? 0.0 : (probs.sum(-1) - 1.0).abs().max().item<double>();
    require(err <= 1e-5 && (probs.numel() == 0 || probs.min().item<double>() >= 0.0),
            ErrorCode::kInvalidDistribution, "probability rows must be non-negative and sum to 1");
  }
  const torch::Tensor onehot = torch::one_hot(tokens, classes_).to(probs.scalar_type());
  const torch::Tensor h = std::get<0>(gru_->forward(torch::cat({onehot, probs}, -1)));
  return out_(h);
}

JointSpaceExtractorsImpl::JointSpaceExtractorsImpl(const std::array<int, 3>& classes, int d_joint) {
  const char* names[3] = {"body", "hand", "face"};
  for (std::size_t p = 0; p < 3; ++p) {
    extractors_[p] = register_module(names[p], JointSpaceExtractor(classes[p], d_joint));
  }
}

torch::Tensor extract_features(JointSpaceExtractor& extractor, const torch::Tensor& tokens,
                               const torch::Tensor& probs) {
  return extractor->forward(tokens, probs);
}

torch::Tensor contrastive_loss(const torch::Tensor& e_a, const torch::Tensor& e_b, const torch::Tensor& negatives,
                               double margin, const torch::Tensor& negative_mask) {
  require(e_a.dim() == 2 && e_a.sizes() == e_b.sizes(), ErrorCode::kShape, "contrastive_loss: e_a/e_b shapes");
  require(negatives.dim() == 2 && negatives.size(1) == e_a.size(1), ErrorCode::kShape,
          "contrastive_loss: negative width");
  const std::int64_t n = e_a.size(0);
  const std::int64_t m = negatives.size(0);
  const torch::Tensor mask =
      negative_mask.defined() ? negative_mask.to(torch::kBool) : torch::ones({n, m}, torch::kBool);
  require(mask.size(0) == n && mask.size(1) == m, ErrorCode::kShape, "contrastive_loss: mask shape");
  const torch::Tensor counts = mask.sum(1);
  require(n > 0 && counts.min().item<std::int64_t>() > 0, ErrorCode::kDegenerateBatch,
          "contrastive_loss needs at least one negative per position");
  const torch::Tensor positive = (e_a - e_b).pow(2).sum(-1);
  const torch::Tensor dist = safe_distance(e_a.unsqueeze(1) - negatives.unsqueeze(0));
  const torch::Tensor hinge = (margin - dist).clamp_min(0.0).pow(2);
  const torch::Tensor weights = mask.to(hinge.scalar_type()) / counts.to(hinge.scalar_type()).unsqueeze(1);
  const torch::Tensor negative = (hinge * weights).sum(1);
  return (positive + negative).mean();
}

ConsistencyTerms consistency_loss(const std::array<torch::Tensor, 3>& side_a,
                                  const std::array<torch::Tensor, 3>& side_b, const torch::Tensor& valid,
                                  const std::array<torch::Tensor, 3>& annotated, const ConsistencyConfig& config) {
  for (std::size_t p = 0; p < 3; ++p) {
    require(side_a[p].dim() == 3 && side_a[p].sizes() == side_a[0].sizes() && side_b[p].sizes() == side_a[0].sizes(),
            ErrorCode::kAlignment, "consistency embeddings must share B x L x d");
  }
  require(valid.dim() == 2 && valid.size(0) == side_a[0].size(0) && valid.size(1) == side_a[0].size(1),
          ErrorCode::kAlignment, "consistency valid mask must be B x L");
  ConsistencyTerms out;
  out.total = torch::zeros({}, side_a[0].options());
  for (std::size_t k = 0; k < 3; ++k) {
    const int a = kPairs[k][0];
    const int b = kPairs[k][1];
    out.pair[k] = torch::zeros({}, side_a[0].options());
    if (config.lambda[k] == 0.0) continue;
    const torch::Tensor both =
        annotated[static_cast<std::size_t>(a)].to(torch::kBool) & annotated[static_cast<std::size_t>(b)].to(torch::kBool);
    const torch::Tensor idx = both.nonzero().reshape({-1});
    if (idx.numel() < 2) continue;
    const torch::Tensor v = valid.to(torch::kBool).index_select(0, idx);
    const torch::Tensor ea = side_a[static_cast<std::size_t>(a)].index_select(0, idx).index({v});
    const torch::Tensor eb = side_b[static_cast<std::size_t>(b)].index_select(0, idx).index({v});
    const torch::Tensor owner =
        torch::arange(idx.numel(), torch::kInt64).unsqueeze(1).expand({idx.numel(), v.size(1)}).index({v});
    const torch::Tensor neg_mask = owner.unsqueeze(1) != owner.unsqueeze(0);
    out.pair[k] = config.lambda[k] * contrastive_loss(ea, eb, eb, config.margin, neg_mask);
    out.total = out.total + out.pair[k];
  }
  return out;
}

torch::Tensor final_loss(const torch::Tensor& gpt_loss, const torch::Tensor& consistency) {
  if (!consistency.defined()) return gpt_loss;
  return gpt_loss + consistency;
}

}  // namespace t2mx::consistency
