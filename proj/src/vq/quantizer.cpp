#include "t2mx/vq/quantizer.hpp"

#include <limits>

#include "t2mx/core/error.hpp"

namespace t2mx::vq {

namespace {

class StraightThrough : public torch::autograd::Function<StraightThrough> {
 public:
  static torch::Tensor forward(torch::autograd::AutogradContext* ctx, const torch::Tensor& z,
                               const torch::Tensor& zq) {
    return zq.clone();
  }
  static torch::autograd::variable_list backward(torch::autograd::AutogradContext* ctx,
                                                 torch::autograd::variable_list grad) {
    return {grad[0], torch::Tensor()};
  }
};

}  // namespace

torch::Tensor nearest_codes(const torch::Tensor& z, const torch::Tensor& codebook) {
  require(codebook.dim() == 2 && codebook.size(0) >= 1, ErrorCode::kShape, "codebook must be K x d");
  require(z.dim() >= 1 && z.size(-1) == codebook.size(1), ErrorCode::kShape,
          "latent width " + std::to_string(z.size(-1)) + " != codebook width " +
              std::to_string(codebook.size(1)));
  const torch::Tensor zz = z.detach().reshape({-1, z.size(-1)}).to(torch::kFloat64).contiguous();
  const torch::Tensor cc = codebook.detach().to(torch::kFloat64).contiguous();
  const std::int64_t n = zz.size(0);
  const std::int64_t k_count = cc.size(0);
  const std::int64_t d = cc.size(1);
  const double* zp = zz.data_ptr<double>();
  const double* cp = cc.data_ptr<double>();
  torch::Tensor out = torch::empty({n}, torch::kInt64);
  auto* op = out.data_ptr<std::int64_t>();
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = zp + i * d;
    double best = std::numeric_limits<double>::infinity();
    std::int64_t arg = 0;
    for (std::int64_t k = 0; k < k_count; ++k) {
      const double* code = cp + k * d;
      double dist = 0.0;
      for (std::int64_t j = 0; j < d; ++j) {
        const double diff = row[j] - code[j];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        arg = k;
      }
    }
    op[i] = arg;
  }
  auto shape = z.sizes().vec();
  shape.pop_back();
  return out.reshape(shape);
}

Quantized quantize(const torch::Tensor& z, const torch::Tensor& codebook) {
  const torch::Tensor tokens = nearest_codes(z, codebook);
  auto shape = z.sizes().vec();
  const torch::Tensor rows = codebook.index_select(0, tokens.reshape({-1}));
  return {rows.reshape(shape), tokens};
}

torch::Tensor straight_through(const torch::Tensor& z, const torch::Tensor& zq) {
  require(z.sizes() == zq.sizes(), ErrorCode::kShape, "straight_through: shape mismatch");
  return StraightThrough::apply(z, zq);
}

}  // namespace t2mx::vq
