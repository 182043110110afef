#include <gtest/gtest.h>

#include "expert_fixture.hpp"
#include "mock_source.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/mx1.hpp"
#include "t2mx/gpt/train.hpp"
#include "t2mx/infer/generate.hpp"

namespace t2mx::infer {
namespace {

using t2mx::testing::error_code_of;
using t2mx::testing::ExpertFixture;
using t2mx::testing::MockSource;
using t2mx::testing::peaked;
using t2mx::testing::TempDir;

const gpt::ExpertSet& experts() {
  static const gpt::ExpertSet set = gpt::load_experts(ExpertFixture::get().dirs());
  return set;
}

std::array<int, 3> fixture_codes() { return ExpertFixture::gpt_config().codes; }

// Four training clips with distinct single descriptions.
core::MotionDataset four_clips() {
  const core::MotionDataset& d = ExpertFixture::get().dataset();
  core::MotionDataset out;
  out.stats = d.stats;
  const char* texts[4] = {"alpha motion", "bravo motion", "charlie motion", "delta motion"};
  for (std::size_t i = 0; i < d.size() && out.size() < 4; ++i) {
    if (d.splits[i] != core::Split::kTrain) continue;
    out.clips.push_back(d.clips[i].with_text({texts[out.size()]}));
    out.splits.push_back(core::Split::kTrain);
  }
  return out;
}

// A generator memorizing four_clips(), trained once.
const gpt::GptCheckpoint& memorized() {
  static TempDir dir;
  static const gpt::GptCheckpoint ck = [] {
    gpt::GptSettings s;
    s.model = ExpertFixture::gpt_config();
    s.train.steps = 400;
    s.train.batch = 4;
    s.train.lr = 1e-3;
    s.train.seed = 2;
    gpt::train_gpt(four_clips(), ExpertFixture::get().dirs(), s, dir.path());
    return gpt::GptCheckpoint::load(dir.path());
  }();
  return ck;
}

TEST(Generate, TokenCountTimesDownsampleFrames) {
  const auto codes = fixture_codes();
  MockSource src(codes, [&](int step, int b) {
    const int k = codes[static_cast<std::size_t>(b)];
    return peaked(k + 1, b == 0 && step == 17 ? k : step % k);
  });
  const GeneratedMotion g = generate(src, experts(), "a person walks", {});
  EXPECT_EQ(g.codes[0].size(), 16u);
  EXPECT_EQ(g.clip.frames(), 64);
  EXPECT_TRUE(g.clip.has(core::Modality::kHand));
  EXPECT_TRUE(g.clip.has(core::Modality::kFace));
  EXPECT_EQ(g.clip.channels(core::Modality::kHand).rows(), 64);
  EXPECT_EQ(g.clip.channels(core::Modality::kFace).rows(), 64);
}

TEST(Generate, ImmediateEndIsTooShort) {
  const auto codes = fixture_codes();
  MockSource src(codes, [&](int, int b) { return peaked(codes[static_cast<std::size_t>(b)] + 1, codes[static_cast<std::size_t>(b)]); });
  EXPECT_EQ(error_code_of([&] { generate(src, experts(), "a person walks", {}); }), ErrorCode::kTooShort);
}

TEST(Generate, EmptyTextAndVocabularyMismatch) {
  const auto codes = fixture_codes();
  MockSource src(codes, [&](int, int b) { return peaked(codes[static_cast<std::size_t>(b)] + 1, 0); });
  EXPECT_EQ(error_code_of([&] { generate(src, experts(), "  ", {}); }), ErrorCode::kEmptyText);
  MockSource wrong({5, 5, 5}, [](int, int) { return peaked(6, 0); });
  EXPECT_EQ(error_code_of([&] { generate(wrong, experts(), "a person walks", {}); }), ErrorCode::kConfig);
}

TEST(Generate, EarlyHandEndWithoutSamplerIsPadded) {
  const auto codes = fixture_codes();
  MockSource src(codes, [&](int step, int b) {
    const int k = codes[static_cast<std::size_t>(b)];
    if (b == 0) return peaked(k + 1, step == 7 ? k : 1);
    if (b == 1) return peaked(k + 1, step == 3 ? k : 2);
    return peaked(k + 1, k);
  });
  SamplerOptions o;
  o.consistency_sampler = false;
  const GeneratedMotion g = generate(src, experts(), "a person walks", o);
  EXPECT_EQ(g.codes[1].size(), 2u);
  EXPECT_TRUE(g.codes[2].empty());
  EXPECT_EQ(g.clip.channels(core::Modality::kHand).rows(), g.clip.frames());
  EXPECT_EQ(g.clip.channels(core::Modality::kFace).rows(), g.clip.frames());
}

TEST(Generate, GreedyIsByteIdentical) {
  const gpt::GptCheckpoint& ck = memorized();
  GenerationRequest r;
  r.text = "bravo motion";
  TempDir a;
  TempDir b;
  core::mx1::write_clip(a.path(), generate(ck, r).clip);
  core::mx1::write_clip(b.path(), generate(ck, r).clip);
  EXPECT_EQ(core::sha256_tree(a.path()), core::sha256_tree(b.path()));
  r.options.sampling.mode = SamplingMode::kTemperature;
  r.options.seed = 4;
  const GeneratedMotion x = generate(ck, r);
  const GeneratedMotion y = generate(ck, r);
  EXPECT_EQ(x.sampled.tokens, y.sampled.tokens);
}

TEST(Generate, MemorizedTextReproducesItsClip) {
  const gpt::GptCheckpoint& ck = memorized();
  const core::MotionDataset d = four_clips();
  const core::NormalizationStats& stats = d.stats;
  for (std::size_t i = 0; i < 4; ++i) {
    const core::MotionClip& clip = d.clips[i];
    GenerationRequest r;
    r.text = clip.text().front();
    const GeneratedMotion g = generate(ck, r);
    const core::FrameMatrix truth = stats.normalize(core::Modality::kBody, clip.body());
    const core::FrameMatrix round = stats.normalize(
        core::Modality::kBody, ck.experts[0]->decode(ck.experts[0]->encode(clip.body()).tokens));
    const core::FrameMatrix gen = stats.normalize(core::Modality::kBody, g.clip.body());
    const Eigen::Index n = truth.rows();
    ASSERT_GE(gen.rows(), n - ck.experts[0]->downsample()) << i;
    const Eigen::Index m = std::min(n, gen.rows());
    const double round_err = (round.topRows(n) - truth).squaredNorm() / static_cast<double>(n);
    const double gen_err = (gen.topRows(m) - truth.topRows(m)).squaredNorm() / static_cast<double>(m);
    EXPECT_LT(gen_err, 2.0 * round_err) << "clip " << i;
  }
}

TEST(Generate, RandomTokenBaseline) {
  const GeneratedMotion g = decode_random_tokens(experts(), 5, 1);
  EXPECT_EQ(g.clip.frames(), 5 * experts()[0]->downsample());
  EXPECT_EQ(decode_random_tokens(experts(), 5, 1).codes, g.codes);
}

}  // namespace
}  // namespace t2mx::infer
