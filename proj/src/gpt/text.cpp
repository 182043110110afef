#include "t2mx/gpt/text.hpp"

#include <cctype>
#include <cmath>

#include "t2mx/core/config.hpp"
#include "t2mx/core/error.hpp"

namespace t2mx::gpt {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

torch::Tensor TextEncoder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<torch::Tensor> rows;
  rows.reserve(texts.size());
  for (const auto& t : texts) rows.push_back(embed(t));
  if (rows.empty()) return torch::zeros({0, features()});
  return torch::stack(rows);
}

HashedBagOfWords::HashedBagOfWords(int bins) : bins_(bins) {
  require(bins >= 1, ErrorCode::kConfig, "text encoder bins must be positive");
}

std::vector<std::string> HashedBagOfWords::words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

torch::Tensor HashedBagOfWords::embed(const std::string& text) const {
  std::vector<float> bag(static_cast<std::size_t>(bins_), 0.0f);
  const auto w = words(text);
  for (std::size_t i = 0; i < w.size(); ++i) {
    bag[fnv1a("1:" + w[i]) % static_cast<std::uint64_t>(bins_)] += 1.0f;
    if (i + 1 < w.size()) bag[fnv1a("2:" + w[i] + " " + w[i + 1]) % static_cast<std::uint64_t>(bins_)] += 1.0f;
  }
  double norm = 0.0;
  for (float v : bag) norm += static_cast<double>(v) * v;
  if (norm > 0.0) {
    const auto inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (float& v : bag) v *= inv;
  }
  return torch::tensor(bag);
}

nlohmann::json HashedBagOfWords::spec() const { return {{"kind", "hashed"}, {"bins", bins_}}; }

std::shared_ptr<const TextEncoder> make_text_encoder(const nlohmann::json& spec) {
  core::ConfigReader r(spec, "text_encoder");
  std::string kind = "hashed";
  int bins = 512;
  r.read("kind", kind);
  r.read("bins", bins);
  r.finish();
  if (kind == "hashed") return std::make_shared<HashedBagOfWords>(bins);
  if (kind == "clip") raise(ErrorCode::kUnsupported, "the CLIP text encoder adapter is not bundled");
  raise(ErrorCode::kConfig, "unknown text encoder kind '" + kind + "'");
}

}  // namespace t2mx::gpt
