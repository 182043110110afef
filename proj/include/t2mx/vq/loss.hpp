#pragma once

#include <torch/torch.h>

namespace t2mx::vq {

/// Each term is its weighted contribution, so
/// total == ((reconstruction + velocity) + alignment) + commitment exactly.
struct VqLossTerms {
  torch::Tensor total;
  torch::Tensor reconstruction;  // SmoothL1(M, M̂)
  torch::Tensor velocity;        // alpha * SmoothL1(V(M), V(M̂)); exactly 0 when alpha == 0
  torch::Tensor alignment;       // mean (sg[z] - zq)², reaches only the codebook
  torch::Tensor commitment;      // beta * mean (z - sg[zq])², reaches only the encoder
};

/// `m`, `m_hat`: B x T x d; `z`, `zq`: B x T' x d_c. Optional masks (B x T and
/// B x T', 1 for real entries) restrict every mean to unpadded positions.
/// SmoothL1 uses transition point 1. Throws kShape on inconsistent shapes and
/// kConfig on negative weights.
VqLossTerms vq_loss(const torch::Tensor& m, const torch::Tensor& m_hat, const torch::Tensor& z,
                    const torch::Tensor& zq, double alpha, double beta,
                    const torch::Tensor& frame_mask = {}, const torch::Tensor& latent_mask = {});

}  // namespace t2mx::vq
