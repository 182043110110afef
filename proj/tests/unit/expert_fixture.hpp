#pragma once

#include <array>
#include <filesystem>
#include <memory>

#include "t2mx/gpt/model.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "t2mx/vq/train.hpp"
#include "test_util.hpp"

namespace t2mx::testing {

// Three small experts trained once per test process on a synthetic corpus.
class ExpertFixture {
 public:
  static const ExpertFixture& get() {
    static const std::unique_ptr<ExpertFixture> instance(new ExpertFixture());
    return *instance;
  }

  const core::MotionDataset& dataset() const { return dataset_; }
  const std::array<std::filesystem::path, 3>& dirs() const { return dirs_; }
  std::filesystem::path root() const { return root_.path(); }

  static vq::VqConfig model(core::Modality m) {
    vq::VqConfig c = vq::VqConfig::for_modality(m);
    c.codes = 12;
    c.code_width = 8;
    c.hidden = 32;
    c.res_blocks = 1;
    return c;
  }

  static gpt::GptConfig gpt_config() {
    gpt::GptConfig c;
    c.codes = {12, 12, 12};
    c.body_code_width = 8;
    c.text_features = 512;
    c.d_model = 32;
    c.heads = 2;
    c.base_layers = 1;
    c.branch_layers = 1;
    c.max_tokens = 32;
    return c;
  }

 private:
  ExpertFixture() {
    prep::SyntheticSpec s;
    s.clips = 24;
    s.min_frames = 32;
    s.max_frames = 56;
    s.seed = 11;
    dataset_ = prep::make_synthetic_dataset(s).dataset;
    vq::VqTrainConfig t;
    t.steps = 40;
    t.batch = 8;
    t.window = 32;
    t.lr = 1e-3;
    t.seed = 3;
    const char* names[3] = {"body", "hand", "face"};
    for (std::size_t p = 0; p < 3; ++p) {
      dirs_[p] = root_.path() / names[p];
      vq::train_vqvae(dataset_, model(core::kModalities[p]), t, dirs_[p]);
    }
  }

  TempDir root_;
  core::MotionDataset dataset_;
  std::array<std::filesystem::path, 3> dirs_;
};

}  // namespace t2mx::testing
