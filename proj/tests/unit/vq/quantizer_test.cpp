#include <gtest/gtest.h>

#include "t2mx/vq/quantizer.hpp"
#include "test_util.hpp"

namespace t2mx::vq {
namespace {

using t2mx::testing::error_code_of;

// Exhaustive search in long double with a strict comparison.
std::vector<std::int64_t> brute_force(const torch::Tensor& z, const torch::Tensor& codebook) {
  const auto za = z.accessor<float, 2>();
  const auto ca = codebook.accessor<float, 2>();
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < z.size(0); ++i) {
    long double best = 0;
    std::int64_t arg = -1;
    for (std::int64_t k = 0; k < codebook.size(0); ++k) {
      long double d = 0;
      for (std::int64_t j = 0; j < z.size(1); ++j) {
        const long double e = static_cast<long double>(za[i][j]) - ca[k][j];
        d += e * e;
      }
      if (arg < 0 || d < best) {
        best = d;
        arg = k;
      }
    }
    out.push_back(arg);
  }
  return out;
}

TEST(Quantize, TwoEntryExamples) {
  const torch::Tensor cb = torch::tensor({0.0f, 0.0f, 1.0f, 1.0f}).reshape({2, 2});
  const Quantized a = quantize(torch::tensor({0.9f, 0.8f}).reshape({1, 2}), cb);
  EXPECT_EQ(a.tokens[0].item<std::int64_t>(), 1);
  EXPECT_TRUE(torch::equal(a.zq, cb[1].reshape({1, 2})));
  const Quantized tie = quantize(torch::tensor({0.5f, 0.5f}).reshape({1, 2}), cb);
  EXPECT_EQ(tie.tokens[0].item<std::int64_t>(), 0);
  const Quantized exact = quantize(cb[1].reshape({1, 2}), cb);
  EXPECT_EQ(exact.tokens[0].item<std::int64_t>(), 1);
  EXPECT_EQ((exact.zq - cb[1]).abs().max().item<float>(), 0.0f);
}

TEST(Quantize, MatchesExhaustiveSearchIncludingTies) {
  torch::manual_seed(3);
  torch::Tensor cb = torch::randn({64, 32});
  // Duplicated rows force exact ties between distinct indices.
  cb[40].copy_(cb[7]);
  cb[63].copy_(cb[7]);
  cb[50].copy_(cb[12]);
  torch::Tensor z = torch::randn({10000, 32}) * 1.5;
  for (int i = 0; i < 200; ++i) z[i].copy_(cb[i % 2 == 0 ? 40 : 50]);
  for (int i = 200; i < 300; ++i) z[i].copy_(cb[7] + 1e-3 * torch::randn({32}));
  const torch::Tensor tokens = nearest_codes(z, cb);
  const auto oracle = brute_force(z, cb);
  ASSERT_EQ(tokens.numel(), 10000);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) mismatches += tokens[i].item<std::int64_t>() != oracle[i];
  EXPECT_EQ(mismatches, 0);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(tokens[i].item<std::int64_t>(), i % 2 == 0 ? 7 : 12);
}

TEST(Quantize, IsIdempotent) {
  torch::manual_seed(4);
  const torch::Tensor cb = torch::randn({16, 8});
  const Quantized q1 = quantize(torch::randn({3, 20, 8}), cb);
  const Quantized q2 = quantize(q1.zq, cb);
  EXPECT_TRUE(torch::equal(q1.tokens, q2.tokens));
  EXPECT_TRUE(torch::equal(q1.zq, q2.zq));
  EXPECT_EQ(q1.tokens.sizes(), (std::vector<std::int64_t>{3, 20}));
}

TEST(Quantize, WidthMismatchIsShapeError) {
  EXPECT_EQ(error_code_of([] { quantize(torch::zeros({2, 3}), torch::zeros({4, 5})); }), ErrorCode::kShape);
}

TEST(StraightThrough, ForwardIsCodeBackwardIsIdentity) {
  torch::manual_seed(5);
  const torch::Tensor z = torch::randn({4, 3}, torch::requires_grad());
  const torch::Tensor cb = torch::randn({5, 3}, torch::requires_grad());
  const Quantized q = quantize(z, cb);
  const torch::Tensor out = straight_through(z, q.zq);
  EXPECT_TRUE(torch::equal(out, q.zq));
  const torch::Tensor w = torch::randn({4, 3});
  (out * w).sum().backward();
  EXPECT_TRUE(torch::equal(z.grad(), w));
  EXPECT_FALSE(cb.grad().defined() && cb.grad().abs().sum().item<float>() != 0.0f);
}

}  // namespace
}  // namespace t2mx::vq
