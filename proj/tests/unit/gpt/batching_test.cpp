#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "t2mx/gpt/batching.hpp"
#include "test_util.hpp"

namespace t2mx::gpt {
namespace {

using core::ModalityMask;
using t2mx::testing::error_code_of;

std::vector<ModalityMask> random_masks(std::size_t n, double p_hand, double p_face, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution h(p_hand);
  std::bernoulli_distribution f(p_face);
  std::vector<ModalityMask> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({true, h(rng), f(rng)});
  return out;
}

std::vector<std::size_t> flatten(const BatchPlan& plan) {
  std::vector<std::size_t> all;
  for (const auto& b : plan) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  return all;
}

TEST(MakeBatches, ThreePatternsInOneBatch) {
  const std::vector<ModalityMask> masks = {{true, false, false}, {true, true, false}, {true, false, true}};
  const BatchPlan plan = make_batches(masks, 3, 0);
  ASSERT_EQ(plan.size(), 1u);
  EXPECT_EQ(flatten(plan), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(MakeBatches, ThousandSamplesAllBatchesCovered) {
  const auto masks = random_masks(1000, 0.6, 0.6, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BatchPlan plan = make_batches(masks, 32, seed);
    EXPECT_EQ(plan.size(), 32u);
    EXPECT_TRUE(covers_all_modalities(plan, masks));
    std::vector<std::size_t> expected(1000);
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = i;
    EXPECT_EQ(flatten(plan), expected);
    for (const auto& b : plan) EXPECT_LE(b.size(), 33u);
  }
}

TEST(MakeBatches, SparseAnnotationStillCovered) {
  auto masks = random_masks(200, 0.0, 0.0, 2);
  masks[5][1] = true;
  masks[17][2] = true;
  masks[33][2] = true;
  const BatchPlan plan = make_batches(masks, 8, 4);
  EXPECT_EQ(plan.size(), 1u);
  EXPECT_TRUE(covers_all_modalities(plan, masks));
  EXPECT_EQ(flatten(plan).size(), 200u);
}

TEST(MakeBatches, SeedsPermuteTheSameMultiset) {
  const auto masks = random_masks(100, 0.5, 0.5, 3);
  const BatchPlan a = make_batches(masks, 10, 1);
  const BatchPlan b = make_batches(masks, 10, 2);
  EXPECT_NE(a, b);
  EXPECT_EQ(flatten(a), flatten(b));
  EXPECT_EQ(a, make_batches(masks, 10, 1));
}

TEST(MakeBatches, Errors) {
  const std::vector<ModalityMask> no_face = {{true, true, false}, {true, false, false}};
  EXPECT_EQ(error_code_of([&] { make_batches(no_face, 2, 0); }), ErrorCode::kNoData);
  const std::vector<ModalityMask> ok = {{true, true, true}};
  EXPECT_EQ(error_code_of([&] { make_batches(ok, 0, 0); }), ErrorCode::kConfig);
  EXPECT_EQ(error_code_of([&] { make_batches({}, 2, 0); }), ErrorCode::kNoData);
}

}  // namespace
}  // namespace t2mx::gpt
