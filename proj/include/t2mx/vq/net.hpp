#pragma once

#include <string>

#include <json.hpp>
#include <torch/torch.h>

#include "t2mx/core/clip.hpp"

namespace t2mx::vq {

enum class CodebookMode { kLoss, kEma };

struct VqConfig {
  core::Modality modality = core::Modality::kBody;
  int codes = 64;        // K
  int code_width = 32;   // d_c
  int hidden = 128;
  int stages = 2;        // each halves time, so l = 2^stages
  int res_blocks = 2;    // per stage, dilations 1, 3, 9, ...
  double alpha = 0.5;    // velocity weight
  double beta = 0.25;    // commitment weight
  CodebookMode codebook_mode = CodebookMode::kLoss;
  double ema_decay = 0.99;
  bool reset_dead_codes = false;
  int reset_every = 20;  // steps between dead-code checks
  bool freeze_codebook = false;
  bool pad_to_multiple = true;  // otherwise clips with T % l != 0 are rejected

  int downsample() const { return 1 << stages; }
  int input_width() const { return core::channel_width(modality); }
  /// Modality defaults: alpha 0.5 for body, 0 for hand and face.
  static VqConfig for_modality(core::Modality m);
  void validate() const;
};

nlohmann::json config_to_json(const VqConfig& c);
/// Starts from `for_modality(modality)` when the key is present; unknown keys raise kConfig.
VqConfig config_from_json(const nlohmann::json& j);

class ResBlockImpl : public torch::nn::Module {
 public:
  ResBlockImpl(int width, int dilation);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv1d conv1_{nullptr};
  torch::nn::Conv1d conv2_{nullptr};
};
TORCH_MODULE(ResBlock);

/// B x T x d_in -> B x T/l x d_c.
class EncoderImpl : public torch::nn::Module {
 public:
  explicit EncoderImpl(const VqConfig& c);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(Encoder);

/// B x T' x d_c -> B x T'·l x d_in.
class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(const VqConfig& c);
  torch::Tensor forward(const torch::Tensor& zq);

 private:
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(Decoder);

/// Encoder, decoder, codebook and the codebook bookkeeping buffers.
class VqNetImpl : public torch::nn::Module {
 public:
  explicit VqNetImpl(const VqConfig& c);

  const VqConfig& config() const { return config_; }
  Encoder encoder{nullptr};
  Decoder decoder{nullptr};
  torch::Tensor codebook;      // K x d_c parameter
  torch::Tensor ema_count;     // K, EMA cluster sizes
  torch::Tensor ema_sum;       // K x d_c, EMA cluster sums
  torch::Tensor usage;         // K, assignments since the last dead-code check
  torch::Tensor initialized;   // scalar int64, 1 once the codebook was seeded from data

 private:
  VqConfig config_;
};
TORCH_MODULE(VqNet);

}  // namespace t2mx::vq
