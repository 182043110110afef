#pragma once

#include <array>

#include <torch/torch.h>

namespace t2mx::gpt {

/// Next-token targets for the T+1 supervised positions of each sample: the T
/// code ids followed by End; positions past `lengths` hold End as padding.
struct GptTargets {
  std::array<torch::Tensor, 3> tokens;     // B x L int64
  torch::Tensor lengths;                   // B int64, T_i + 1
  std::array<torch::Tensor, 3> annotated;  // B bool; body is always true
};

struct GptLossTerms {
  torch::Tensor total;                // CE_body + eta1 CE_hand + eta2 CE_face
  std::array<torch::Tensor, 3> ce;    // unweighted per-modality cross-entropy
};

/// Each CE is the mean over the supervised positions of the samples annotated
/// with that modality. Unannotated samples are dropped before any arithmetic,
/// so their targets cannot influence the result. Throws kContract when a
/// modality has no annotated sample and kShape on inconsistent inputs.
GptLossTerms gpt_loss(const std::array<torch::Tensor, 3>& logits, const GptTargets& targets, double eta1,
                      double eta2);

/// B x L bool, true at positions < lengths.
torch::Tensor position_mask(const torch::Tensor& lengths, std::int64_t max_len);

/// Teacher-forced argmax accuracy of one modality over its supervised positions.
double next_token_accuracy(const torch::Tensor& logits, const torch::Tensor& tokens, const torch::Tensor& lengths,
                           const torch::Tensor& annotated);

}  // namespace t2mx::gpt
