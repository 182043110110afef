#pragma once

#include <torch/torch.h>

namespace t2mx::vq {

/// Index of the nearest codebook row for every latent row, by squared
/// Euclidean distance accumulated in double; ties go to the lowest index.
/// `z` is (..., d), `codebook` is K x d; the result is int64 with z's leading shape.
torch::Tensor nearest_codes(const torch::Tensor& z, const torch::Tensor& codebook);

struct Quantized {
  torch::Tensor zq;      // codebook rows, differentiable with respect to the codebook
  torch::Tensor tokens;  // int64 indices
};

/// Throws kShape when the widths disagree.
Quantized quantize(const torch::Tensor& z, const torch::Tensor& codebook);

/// Forward value `zq`; backward passes the incoming gradient to `z` unchanged
/// and nothing to `zq`.
torch::Tensor straight_through(const torch::Tensor& z, const torch::Tensor& zq);

}  // namespace t2mx::vq
