#include <random>

#include <gtest/gtest.h>

#include "t2mx/vq/expert.hpp"
#include "t2mx/vq/loss.hpp"
#include "t2mx/vq/quantizer.hpp"
#include "test_util.hpp"

namespace t2mx::vq {
namespace {

using core::FrameMatrix;
using core::Modality;
using t2mx::testing::error_code_of;

VqConfig small_config(Modality m) {
  VqConfig c = VqConfig::for_modality(m);
  c.codes = 16;
  c.code_width = 8;
  c.hidden = 16;
  return c;
}

core::ChannelStats unit_stats(Modality m) {
  const int d = core::channel_width(m);
  return {Eigen::VectorXf::Zero(d), Eigen::VectorXf::Ones(d)};
}

VqExpert make_expert(Modality m, int seed = 0, bool pad = true) {
  torch::manual_seed(seed);
  VqConfig c = small_config(m);
  c.pad_to_multiple = pad;
  return VqExpert(VqNet(c), unit_stats(m));
}

TEST(Expert, DownsamplesByFour) {
  const VqExpert e = make_expert(Modality::kBody);
  std::mt19937_64 rng(1);
  EXPECT_EQ(e.encode(t2mx::testing::random_channels(Modality::kBody, 64, rng)).tokens.size(), 16u);
  EXPECT_EQ(e.encode(t2mx::testing::random_channels(Modality::kBody, 4, rng)).tokens.size(), 1u);
}

TEST(Expert, ShapeContractOverRandomConfigs) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> frames(1, 90);
  for (int i = 0; i < 50; ++i) {
    const Modality m = core::kModalities[static_cast<std::size_t>(i % 3)];
    const VqExpert e = make_expert(m, i);
    const int t = frames(rng);
    const EncodedMotion enc = e.encode(t2mx::testing::random_channels(m, t, rng));
    const int rows = (t + 3) / 4;
    EXPECT_EQ(static_cast<int>(enc.tokens.size()), rows);
    EXPECT_EQ(enc.z.size(0), rows);
    EXPECT_EQ(enc.z.size(1), 8);
    EXPECT_EQ(enc.true_length, t);
    EXPECT_EQ(enc.padded_length, rows * 4);
    const FrameMatrix out = e.decode(enc.tokens);
    EXPECT_EQ(out.rows(), rows * 4);
    EXPECT_EQ(out.cols(), core::channel_width(m));
  }
}

TEST(Expert, RejectsWhenPaddingDisabled) {
  const VqExpert e = make_expert(Modality::kFace, 0, false);
  FrameMatrix m = FrameMatrix::Zero(6, core::channel_width(Modality::kFace));
  EXPECT_EQ(error_code_of([&] { e.encode(m); }), ErrorCode::kShape);
  EXPECT_EQ(error_code_of([&] { e.encode(FrameMatrix::Zero(8, 3)); }), ErrorCode::kShape);
}

TEST(Expert, SingleTokenDecodesToFourFrames) {
  const VqExpert e = make_expert(Modality::kHand);
  EXPECT_EQ(e.decode({3}).rows(), 4);
  EXPECT_EQ(error_code_of([&] { e.decode({16}); }), ErrorCode::kInvalidToken);
  EXPECT_EQ(error_code_of([&] { e.decode({-1}); }), ErrorCode::kInvalidToken);
  EXPECT_EQ(error_code_of([&] { e.decode({}); }), ErrorCode::kTooShort);
}

TEST(Expert, DecodeEqualsDecoderOnGatheredRows) {
  const VqExpert e = make_expert(Modality::kFace, 3);
  core::ChannelStats stats;
  stats.mean = Eigen::VectorXf::LinSpaced(56, -1.0f, 1.0f);
  stats.std = Eigen::VectorXf::Constant(56, 2.0f);
  const VqExpert scaled(e.net(), stats);
  const std::vector<int> tokens = {5, 0, 15, 5, 9};
  const torch::Tensor cb = scaled.codebook();
  torch::Tensor rows = torch::empty({1, 5, 8});
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 8; ++j) rows[0][i][j] = cb[tokens[i]][j].item<float>();
  }
  const FrameMatrix normalized = to_frames(scaled.decode_rows(rows).squeeze(0));
  const FrameMatrix out = scaled.decode(tokens);
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      EXPECT_FLOAT_EQ(out(t, c), normalized(t, c) * 2.0f + stats.mean[c]);
    }
  }
}

TEST(Expert, EncodeMatchesNearestCodeOfLatents) {
  const VqExpert e = make_expert(Modality::kBody, 4);
  std::mt19937_64 rng(4);
  const EncodedMotion enc = e.encode(t2mx::testing::random_channels(Modality::kBody, 20, rng));
  const torch::Tensor expect = nearest_codes(enc.z, e.codebook());
  for (std::size_t i = 0; i < enc.tokens.size(); ++i) {
    EXPECT_EQ(enc.tokens[i], expect[static_cast<std::int64_t>(i)].item<std::int64_t>());
  }
}

TEST(Expert, StraightThroughMatchesStopGradientForm) {
  torch::manual_seed(6);
  VqNet net(small_config(Modality::kHand));
  const torch::Tensor x = torch::randn({2, 16, core::channel_width(Modality::kHand)});
  auto encoder_grads = [&](bool custom) {
    net->zero_grad();
    const torch::Tensor z = net->encoder->forward(x);
    const Quantized q = quantize(z, net->codebook);
    const torch::Tensor zq = custom ? straight_through(z, q.zq) : z + (q.zq - z).detach();
    torch::smooth_l1_loss(net->decoder->forward(zq), x).backward();
    std::vector<torch::Tensor> g;
    for (const auto& p : net->encoder->parameters()) g.push_back(p.grad().clone());
    return g;
  };
  const auto a = encoder_grads(true);
  const auto b = encoder_grads(false);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT((a[i] - b[i]).abs().max().item<float>(), 1e-6);
}

TEST(TokenSequence, EndOnlyAtTheFinalPosition) {
  const TokenSequence ok(Modality::kBody, 8, {1, 2, 8});
  EXPECT_TRUE(ok.ended());
  EXPECT_EQ(ok.code_ids(), (std::vector<int>{1, 2}));
  EXPECT_EQ(error_code_of([] { TokenSequence(Modality::kBody, 8, {1, 8, 2}); }), ErrorCode::kInvalidToken);
  EXPECT_EQ(error_code_of([] { TokenSequence(Modality::kBody, 8, {9}); }), ErrorCode::kInvalidToken);
  EXPECT_FALSE(TokenSequence(Modality::kHand, 8, {0, 7}).ended());
}

TEST(VqConfigJson, RoundTripAndUnknownKeys) {
  VqConfig c = VqConfig::for_modality(Modality::kFace);
  EXPECT_EQ(c.alpha, 0.0);
  EXPECT_EQ(VqConfig::for_modality(Modality::kBody).alpha, 0.5);
  c.codebook_mode = CodebookMode::kEma;
  c.codes = 32;
  const VqConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  nlohmann::json j = config_to_json(c);
  j["colour"] = 1;
  EXPECT_EQ(error_code_of([&] { config_from_json(j); }), ErrorCode::kConfig);
  j = config_to_json(c);
  j["codes"] = 1;
  EXPECT_EQ(error_code_of([&] { config_from_json(j); }), ErrorCode::kConfig);
}

}  // namespace
}  // namespace t2mx::vq
