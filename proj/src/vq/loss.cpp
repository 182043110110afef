#include "t2mx/vq/loss.hpp"

#include "t2mx/core/error.hpp"

namespace t2mx::vq {

namespace {

torch::Tensor ones_mask(const torch::Tensor& x) {
  return torch::ones({x.size(0), x.size(1)}, x.options());
}

// Mean of a B x T x d elementwise tensor over positions where mask (B x T) is set.
torch::Tensor masked_mean(const torch::Tensor& e, const torch::Tensor& mask) {
  const torch::Tensor w = mask.to(e.scalar_type()).unsqueeze(-1);
  const torch::Tensor denom = w.sum() * static_cast<double>(e.size(-1));
  return (e * w).sum() / denom.clamp_min(1.0);
}

}  // namespace

VqLossTerms vq_loss(const torch::Tensor& m, const torch::Tensor& m_hat, const torch::Tensor& z,
                    const torch::Tensor& zq, double alpha, double beta, const torch::Tensor& frame_mask,
                    const torch::Tensor& latent_mask) {
  require(alpha >= 0.0 && beta >= 0.0, ErrorCode::kConfig, "vq_loss weights must be non-negative");
  require(m.dim() == 3 && m.sizes() == m_hat.sizes(), ErrorCode::kShape, "vq_loss: motion shape mismatch");
  require(z.dim() == 3 && z.sizes() == zq.sizes() && z.size(0) == m.size(0), ErrorCode::kShape,
          "vq_loss: latent shape mismatch");
  const torch::Tensor fm = frame_mask.defined() ? frame_mask : ones_mask(m);
  const torch::Tensor lm = latent_mask.defined() ? latent_mask : ones_mask(z);
  require(fm.dim() == 2 && fm.size(0) == m.size(0) && fm.size(1) == m.size(1), ErrorCode::kShape,
          "vq_loss: frame mask shape");
  require(lm.dim() == 2 && lm.size(0) == z.size(0) && lm.size(1) == z.size(1), ErrorCode::kShape,
          "vq_loss: latent mask shape");

  VqLossTerms out;
  out.reconstruction = masked_mean(
      torch::smooth_l1_loss(m_hat, m, torch::Reduction::None, /*beta=*/1.0), fm);
  if (alpha > 0.0 && m.size(1) >= 2) {
    using torch::indexing::Slice;
    const torch::Tensor v = m.index({Slice(), Slice(1)}) - m.index({Slice(), Slice(0, -1)});
    const torch::Tensor vh = m_hat.index({Slice(), Slice(1)}) - m_hat.index({Slice(), Slice(0, -1)});
    const torch::Tensor vm = fm.index({Slice(), Slice(1)}) * fm.index({Slice(), Slice(0, -1)});
    out.velocity = alpha * masked_mean(torch::smooth_l1_loss(vh, v, torch::Reduction::None, 1.0), vm);
  } else {
    out.velocity = torch::zeros({}, m.options());
  }
  out.alignment = masked_mean((z.detach() - zq).pow(2), lm);
  out.commitment = beta * masked_mean((z - zq.detach()).pow(2), lm);
  out.total = ((out.reconstruction + out.velocity) + out.alignment) + out.commitment;
  return out;
}

}  // namespace t2mx::vq
