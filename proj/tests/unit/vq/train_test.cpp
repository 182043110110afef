#include <gtest/gtest.h>

#include "t2mx/core/io.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "t2mx/vq/expert.hpp"
#include "t2mx/vq/train.hpp"
#include "test_util.hpp"

namespace t2mx::vq {
namespace {

using core::Modality;
using t2mx::testing::error_code_of;
using t2mx::testing::TempDir;

core::MotionDataset corpus(int clips, std::uint64_t seed) {
  prep::SyntheticSpec s;
  s.clips = clips;
  s.min_frames = 40;
  s.max_frames = 64;
  s.seed = seed;
  return prep::make_synthetic_dataset(s).dataset;
}

VqConfig small_model(Modality m) {
  VqConfig c = VqConfig::for_modality(m);
  c.codes = 16;
  c.code_width = 8;
  c.hidden = 32;
  c.res_blocks = 1;
  return c;
}

VqTrainConfig short_run(int steps) {
  VqTrainConfig t;
  t.steps = steps;
  t.batch = 4;
  t.window = 32;
  t.lr = 1e-3;
  t.seed = 5;
  return t;
}

TEST(TrainVq, SingleClipIsMemorized) {
  core::MotionDataset d = corpus(10, 1);
  core::MotionDataset one;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.splits[i] == core::Split::kTrain) {
      one.clips.push_back(d.clips[i]);
      one.splits.push_back(core::Split::kTrain);
      break;
    }
  }
  one.stats = d.stats;
  TempDir dir;
  const VqTrainResult r = train_vqvae(one, small_model(Modality::kBody), short_run(200), dir.path());
  ASSERT_TRUE(r.finished);
  ASSERT_EQ(r.trace.size(), 200u);
  EXPECT_LT(r.trace.back().reconstruction, r.trace.front().reconstruction);
  EXPECT_EQ(r.epochs.size(), 200u);
  for (const char* f : {"config.json", "weights.bin", "weights.json", "optimizer.bin", "codebook.f32",
                        "normalization.json", "state.json", "loss_trace.csv", "loss_curve.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_EQ(std::filesystem::file_size(dir / "codebook.f32"), 16u * 8u * 4u);
  // The saved expert reproduces the in-process codebook.
  const VqExpert e = VqExpert::load(dir.path());
  const auto bytes = core::read_binary_file(dir / "codebook.f32");
  EXPECT_EQ(std::memcmp(bytes.data(), e.codebook().data_ptr<float>(), bytes.size()), 0);
}

TEST(TrainVq, FrozenCodebookKeepsItsBytes) {
  const core::MotionDataset d = corpus(12, 2);
  VqConfig m = small_model(Modality::kFace);
  m.freeze_codebook = true;
  m.reset_dead_codes = true;
  TempDir before;
  VqRunOptions stop;
  stop.stop_after = 0;
  train_vqvae(d, m, short_run(40), before.path(), stop);
  TempDir after;
  train_vqvae(d, m, short_run(40), after.path());
  EXPECT_EQ(core::sha256_file(before / "codebook.f32"), core::sha256_file(after / "codebook.f32"));
  EXPECT_NE(core::sha256_file(before / "weights.bin"), core::sha256_file(after / "weights.bin"));
}

TEST(TrainVq, ResumeReproducesTheUninterruptedRun) {
  const core::MotionDataset d = corpus(16, 3);
  VqConfig m = small_model(Modality::kHand);
  m.reset_dead_codes = true;
  m.reset_every = 5;
  TempDir full;
  train_vqvae(d, m, short_run(24), full.path());
  TempDir split;
  VqRunOptions stop;
  stop.stop_after = 11;
  const VqTrainResult partial = train_vqvae(d, m, short_run(24), split.path(), stop);
  EXPECT_FALSE(partial.finished);
  EXPECT_EQ(partial.steps_done, 11);
  VqRunOptions resume;
  resume.resume = true;
  const VqTrainResult rest = train_vqvae(d, m, short_run(24), split.path(), resume);
  EXPECT_TRUE(rest.finished);
  EXPECT_EQ(core::sha256_tree(full.path()), core::sha256_tree(split.path()));
}

TEST(TrainVq, ResumeRejectsChangedConfig) {
  const core::MotionDataset d = corpus(8, 4);
  TempDir dir;
  VqRunOptions stop;
  stop.stop_after = 2;
  train_vqvae(d, small_model(Modality::kBody), short_run(6), dir.path(), stop);
  VqRunOptions resume;
  resume.resume = true;
  VqConfig other = small_model(Modality::kBody);
  other.beta = 0.5;
  EXPECT_EQ(error_code_of([&] { train_vqvae(d, other, short_run(6), dir.path(), resume); }), ErrorCode::kConfig);
}

TEST(TrainVq, SameSeedSameTrace) {
  const core::MotionDataset d = corpus(8, 5);
  TempDir a;
  TempDir b;
  train_vqvae(d, small_model(Modality::kFace), short_run(10), a.path());
  train_vqvae(d, small_model(Modality::kFace), short_run(10), b.path());
  EXPECT_EQ(core::read_text_file(a / "loss_trace.csv"), core::read_text_file(b / "loss_trace.csv"));
}

TEST(TrainVq, MissingModalityIsNoData) {
  prep::SyntheticSpec s;
  s.clips = 10;
  s.min_frames = 16;
  s.max_frames = 20;
  s.p_hand = 0.0;
  const core::MotionDataset d = prep::make_synthetic_dataset(s).dataset;
  TempDir dir;
  EXPECT_EQ(error_code_of([&] { train_vqvae(d, small_model(Modality::kHand), short_run(5), dir.path()); }),
            ErrorCode::kNoData);
}

TEST(TrainVq, EmaModeMovesCodesWithoutGradients) {
  const core::MotionDataset d = corpus(12, 6);
  VqConfig m = small_model(Modality::kFace);
  m.codebook_mode = CodebookMode::kEma;
  m.ema_decay = 0.9;
  TempDir start;
  VqRunOptions stop;
  stop.stop_after = 1;
  train_vqvae(d, m, short_run(200), start.path(), stop);
  TempDir end;
  const VqTrainResult r = train_vqvae(d, m, short_run(200), end.path());
  EXPECT_NE(core::sha256_file(start / "codebook.f32"), core::sha256_file(end / "codebook.f32"));
  double first = 0.0;
  double last = 0.0;
  for (int i = 0; i < 20; ++i) {
    first += r.trace[static_cast<std::size_t>(i)].reconstruction;
    last += r.trace[r.trace.size() - 1 - static_cast<std::size_t>(i)].reconstruction;
  }
  EXPECT_LT(last, first);
}

TEST(TrainVq, DeadCodeResetKeepsUsageHigh) {
  const core::MotionDataset d = corpus(60, 7);
  VqConfig m = VqConfig::for_modality(Modality::kBody);
  m.hidden = 64;
  m.res_blocks = 1;
  m.reset_dead_codes = true;
  VqTrainConfig t = short_run(600);
  t.batch = 16;
  t.lr = 2e-3;
  TempDir dir;
  const VqTrainResult r = train_vqvae(d, m, t, dir.path());
  ASSERT_FALSE(r.epochs.empty());
  EXPECT_GE(r.epochs.back().usage, 0.2);
  EXPECT_GE(codebook_usage(dir.path(), d), 0.2);
  EXPECT_LT(r.epochs.back().reconstruction, 0.5 * r.epochs.front().reconstruction);
}

TEST(TrainConfigJson, RejectsUnknownKeysAndBadWindows) {
  VqTrainConfig t;
  t.lr_milestones = {100, 200};
  const VqTrainConfig back = train_config_from_json(train_config_to_json(t));
  EXPECT_EQ(train_config_to_json(back), train_config_to_json(t));
  nlohmann::json j = train_config_to_json(t);
  j["epochs"] = 3;
  EXPECT_EQ(error_code_of([&] { train_config_from_json(j); }), ErrorCode::kConfig);
  t.window = 30;
  EXPECT_EQ(error_code_of([&] { t.validate(4); }), ErrorCode::kConfig);
}

}  // namespace
}  // namespace t2mx::vq
