#include "t2mx/gpt/batching.hpp"

#include <algorithm>
#include <numeric>

#include "t2mx/core/error.hpp"
#include "t2mx/core/random.hpp"

namespace t2mx::gpt {

BatchPlan make_batches(const std::vector<core::ModalityMask>& annotation, int batch_size, std::uint64_t seed) {
  require(batch_size >= 1, ErrorCode::kConfig, "batch size must be >= 1");
  const std::size_t n = annotation.size();
  require(n > 0, ErrorCode::kNoData, "no samples to batch");
  std::size_t hand = 0;
  std::size_t face = 0;
  for (const auto& m : annotation) {
    require(m[0], ErrorCode::kContract, "every sample must carry body channels");
    hand += m[1];
    face += m[2];
  }
  require(hand > 0, ErrorCode::kNoData, "no sample is annotated with hand channels");
  require(face > 0, ErrorCode::kNoData, "no sample is annotated with face channels");

  const auto b = static_cast<std::size_t>(batch_size);
  const std::size_t count = std::min({(n + b - 1) / b, hand, face});

  core::Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());

  std::vector<std::size_t> both;
  std::vector<std::size_t> hand_only;
  std::vector<std::size_t> face_only;
  std::vector<std::size_t> rest;
  for (std::size_t i : order) {
    const auto& m = annotation[i];
    if (m[1] && m[2]) both.push_back(i);
    else if (m[1]) hand_only.push_back(i);
    else if (m[2]) face_only.push_back(i);
    else rest.push_back(i);
  }

  // Seed each batch with one sample of each modality, then fill the smallest batches.
  BatchPlan plan(count);
  std::size_t ib = 0;
  std::size_t ih = 0;
  std::size_t jf = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (ib < both.size()) {
      plan[k].push_back(both[ib++]);
    } else {
      plan[k].push_back(hand_only[ih++]);
      plan[k].push_back(face_only[jf++]);
    }
  }
  std::vector<std::size_t> leftovers;
  leftovers.insert(leftovers.end(), both.begin() + static_cast<std::ptrdiff_t>(ib), both.end());
  leftovers.insert(leftovers.end(), hand_only.begin() + static_cast<std::ptrdiff_t>(ih), hand_only.end());
  leftovers.insert(leftovers.end(), face_only.begin() + static_cast<std::ptrdiff_t>(jf), face_only.end());
  leftovers.insert(leftovers.end(), rest.begin(), rest.end());
  rng.shuffle(leftovers.begin(), leftovers.end());
  for (std::size_t i : leftovers) {
    auto smallest = std::min_element(plan.begin(), plan.end(),
                                     [](const auto& a, const auto& c) { return a.size() < c.size(); });
    smallest->push_back(i);
  }
  for (auto& batch : plan) rng.shuffle(batch.begin(), batch.end());
  rng.shuffle(plan.begin(), plan.end());
  return plan;
}

bool covers_all_modalities(const BatchPlan& plan, const std::vector<core::ModalityMask>& annotation) {
  for (const auto& batch : plan) {
    core::ModalityMask seen = {false, false, false};
    for (std::size_t i : batch) {
      for (int p = 0; p < 3; ++p) seen[static_cast<std::size_t>(p)] = seen[static_cast<std::size_t>(p)] || annotation[i][static_cast<std::size_t>(p)];
    }
    if (!(seen[0] && seen[1] && seen[2])) return false;
  }
  return true;
}

}  // namespace t2mx::gpt
