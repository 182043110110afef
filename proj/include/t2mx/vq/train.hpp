#pragma once

// Checkpoint directory written by train_vqvae:
//   config.json                {model, train}
//   weights.{bin,json}         parameters and codebook buffers
//   optimizer.{bin,json}       AdamW moments
//   codebook.f32               raw little-endian K x d_c float32
//   normalization.json         statistics of the expert's modality
//   state.json                 step counter, partial-epoch usage, RNG scheme
//   loss_trace.csv             one row per step
//   loss_curve.csv             one row per epoch

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "t2mx/core/clip.hpp"
#include "t2mx/vq/net.hpp"

namespace t2mx::vq {

struct VqTrainConfig {
  int steps = 1500;
  int batch = 32;
  int window = 64;            // crop length in frames, a multiple of l
  double lr = 2e-4;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.99;
  std::vector<int> lr_milestones;  // lr *= lr_gamma at each listed step
  double lr_gamma = 0.1;
  int checkpoint_every = 0;   // 0 writes only the final checkpoint
  std::uint64_t seed = 0;

  void validate(int downsample) const;
};

nlohmann::json train_config_to_json(const VqTrainConfig& c);
VqTrainConfig train_config_from_json(const nlohmann::json& j);

struct VqStepLoss {
  int step = 0;
  double total = 0, reconstruction = 0, velocity = 0, alignment = 0, commitment = 0;
  int used_codes = 0;  // distinct codes in the batch
};

struct VqEpochStats {
  int epoch = 0;
  double total = 0, reconstruction = 0;
  double usage = 0;  // distinct codes assigned over the epoch / K
};

struct VqTrainResult {
  int steps_done = 0;
  bool finished = false;
  std::vector<VqStepLoss> trace;
  std::vector<VqEpochStats> epochs;
};

struct VqRunOptions {
  bool resume = false;   // continue from the checkpoint in out_dir when present
  int stop_after = -1;   // simulate an interrupt after this many total steps
};

/// Trains one expert on the training split clips carrying `model.modality`,
/// normalized with the dataset statistics. Deterministic in `train.seed`.
/// Throws kNoData when no training clip has the modality.
VqTrainResult train_vqvae(const core::MotionDataset& dataset, const VqConfig& model,
                          const VqTrainConfig& train, const std::filesystem::path& out_dir,
                          const VqRunOptions& options = {});

/// Fraction of codes assigned when encoding every training clip of the modality.
double codebook_usage(const std::filesystem::path& checkpoint_dir, const core::MotionDataset& dataset);

}  // namespace t2mx::vq
