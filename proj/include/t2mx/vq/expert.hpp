#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "t2mx/core/clip.hpp"
#include "t2mx/vq/net.hpp"

namespace t2mx::vq {

/// Code ids in [0, K) optionally closed by the End symbol K, which may only
/// occupy the final position. Throws kInvalidToken otherwise.
class TokenSequence {
 public:
  TokenSequence(core::Modality modality, int codes, std::vector<int> ids);

  core::Modality modality() const { return modality_; }
  int codes() const { return codes_; }
  int end_id() const { return codes_; }
  const std::vector<int>& ids() const { return ids_; }
  bool ended() const { return !ids_.empty() && ids_.back() == codes_; }
  /// The ids without the End symbol.
  std::vector<int> code_ids() const;

 private:
  core::Modality modality_;
  int codes_;
  std::vector<int> ids_;
};

struct EncodedMotion {
  std::vector<int> tokens;
  torch::Tensor z;       // T' x d_c latent rows before quantization
  int true_length = 0;   // input frames
  int padded_length = 0; // frames after edge padding, T'·l
};

core::FrameMatrix to_frames(const torch::Tensor& t);
torch::Tensor to_tensor(const core::FrameMatrix& m);

/// Right-pads by repeating the last row up to a multiple of `multiple`.
core::FrameMatrix pad_to_multiple(const core::FrameMatrix& m, int multiple);

/// A trained expert: immutable after construction, safe to share across threads.
class VqExpert {
 public:
  VqExpert(VqNet net, core::ChannelStats stats);
  /// Loads config.json, weights and normalization.json from a checkpoint directory.
  static VqExpert load(const std::filesystem::path& dir);

  const VqConfig& config() const { return net_->config(); }
  core::Modality modality() const { return config().modality; }
  int codes() const { return config().codes; }
  int downsample() const { return config().downsample(); }
  const core::ChannelStats& stats() const { return stats_; }
  /// K x d_c copy of the codebook.
  torch::Tensor codebook() const;
  const VqNet& net() const { return net_; }

  /// Physical channels to tokens. Throws kShape for a wrong width, or when
  /// T % l != 0 and padding is disabled.
  EncodedMotion encode(const core::FrameMatrix& physical) const;
  /// Tokens to physical channels with T'·l frames. Throws kInvalidToken for ids
  /// outside [0, K) and kTooShort for an empty sequence.
  core::FrameMatrix decode(const std::vector<int>& tokens) const;
  /// Decoder output in normalized units for B x T' x d_c code rows.
  torch::Tensor decode_rows(const torch::Tensor& zq) const;

 private:
  mutable VqNet net_;  // forward passes are not const in torch
  core::ChannelStats stats_;
};

core::FrameMatrix tokens_to_motion(const std::vector<int>& tokens, const VqExpert& expert);

}  // namespace t2mx::vq
