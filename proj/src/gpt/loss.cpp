#include "t2mx/gpt/loss.hpp"

#include "t2mx/core/error.hpp"

namespace t2mx::gpt {

namespace {

const char* kNames[3] = {"body", "hand", "face"};

}  // namespace

torch::Tensor position_mask(const torch::Tensor& lengths, std::int64_t max_len) {
  return torch::arange(max_len, torch::kInt64).unsqueeze(0) < lengths.unsqueeze(1);
}

GptLossTerms gpt_loss(const std::array<torch::Tensor, 3>& logits, const GptTargets& targets, double eta1,
                      double eta2) {
  require(eta1 >= 0.0 && eta2 >= 0.0, ErrorCode::kConfig, "gpt loss weights must be non-negative");
  const std::int64_t b = targets.lengths.size(0);
  GptLossTerms out;
  for (std::size_t p = 0; p < 3; ++p) {
    const torch::Tensor& lg = logits[p];
    const torch::Tensor& tk = targets.tokens[p];
    require(lg.dim() == 3 && lg.size(0) == b && tk.dim() == 2 && tk.size(0) == b && tk.size(1) == lg.size(1),
            ErrorCode::kShape, std::string("gpt_loss: ") + kNames[p] + " logits/targets shape");
    const torch::Tensor idx = targets.annotated[p].to(torch::kBool).nonzero().reshape({-1});
    require(idx.numel() > 0, ErrorCode::kContract,
            std::string("batch has no sample annotated with ") + kNames[p]);
    const torch::Tensor sel_logits = lg.index_select(0, idx);
    const torch::Tensor sel_tokens = tk.index_select(0, idx);
    const torch::Tensor mask = position_mask(targets.lengths.index_select(0, idx), lg.size(1));
    const torch::Tensor logp = torch::log_softmax(sel_logits.index({mask}), -1);
    const torch::Tensor picked = logp.gather(1, sel_tokens.index({mask}).unsqueeze(1)).squeeze(1);
    out.ce[p] = -picked.mean();
  }
  out.total = (out.ce[0] + eta1 * out.ce[1]) + eta2 * out.ce[2];
  return out;
}

double next_token_accuracy(const torch::Tensor& logits, const torch::Tensor& tokens, const torch::Tensor& lengths,
                           const torch::Tensor& annotated) {
  torch::NoGradGuard guard;
  const torch::Tensor idx = annotated.to(torch::kBool).nonzero().reshape({-1});
  if (idx.numel() == 0) return 0.0;
  const torch::Tensor mask = position_mask(lengths.index_select(0, idx), logits.size(1));
  const torch::Tensor pred = logits.index_select(0, idx).argmax(-1).index({mask});
  const torch::Tensor truth = tokens.index_select(0, idx).index({mask});
  return pred.eq(truth).to(torch::kFloat64).mean().item<double>();
}

}  // namespace t2mx::gpt
