#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

namespace t2mx::gpt {

/// Maps a description to a fixed-width feature vector. The GPT projects the
/// features to its hidden width with a learned linear layer.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual int features() const = 0;
  /// 1-D float tensor of width features(); identical for identical text.
  virtual torch::Tensor embed(const std::string& text) const = 0;
  virtual nlohmann::json spec() const = 0;

  /// B x features().
  torch::Tensor embed_batch(const std::vector<std::string>& texts) const;
};

/// Lower-cased alphanumeric words; unigrams and bigrams are hashed (FNV-1a)
/// into `bins` counters and the bag is L2-normalized.
class HashedBagOfWords final : public TextEncoder {
 public:
  explicit HashedBagOfWords(int bins = 512);
  int features() const override { return bins_; }
  torch::Tensor embed(const std::string& text) const override;
  nlohmann::json spec() const override;

  static std::vector<std::string> words(const std::string& text);

 private:
  int bins_;
};

/// {"kind": "hashed", "bins": n}. The "clip" kind is reserved for an external
/// adapter and raises kUnsupported; other kinds raise kConfig.
std::shared_ptr<const TextEncoder> make_text_encoder(const nlohmann::json& spec);

}  // namespace t2mx::gpt
