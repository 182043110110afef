#include <cstring>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "t2mx/core/dataset_io.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/mx1.hpp"
#include "t2mx/core/skeleton.hpp"
#include "test_util.hpp"

namespace t2mx::core {
namespace {

using t2mx::testing::error_code_of;
using t2mx::testing::random_clip;
using t2mx::testing::TempDir;

TEST(MotionClip, ChannelWidthLaw) {
  EXPECT_EQ(channel_width(Modality::kBody), 260);
  EXPECT_EQ(channel_width(Modality::kHand), 180);
  EXPECT_EQ(channel_width(Modality::kFace), 56);
  EXPECT_EQ(error_code_of([] { MotionClip("x", 30, FrameMatrix(4, 259), std::nullopt, std::nullopt, {}); }),
            ErrorCode::kShape);
  EXPECT_EQ(error_code_of([] {
              MotionClip("x", 30, FrameMatrix(4, 260), FrameMatrix(5, 180), std::nullopt, {});
            }),
            ErrorCode::kShape);
}

TEST(MotionClip, MaskAndAccess) {
  std::mt19937_64 rng(2);
  const MotionClip c = random_clip("a", 8, rng, true, false);
  EXPECT_EQ(c.modality_mask(), (ModalityMask{true, true, false}));
  EXPECT_EQ(error_code_of([&] { c.channels(Modality::kFace); }), ErrorCode::kContract);
  const MotionClip d = c.with_channels(Modality::kHand, std::nullopt);
  EXPECT_FALSE(d.has(Modality::kHand));
  EXPECT_TRUE(c.has(Modality::kHand));
}

TEST(Split, EightyTenTen) {
  for (std::size_t n : {10u, 37u, 100u, 1001u}) {
    const auto s = make_split(n, 42);
    std::array<std::size_t, 3> count{};
    for (Split x : s) ++count[static_cast<int>(x)];
    EXPECT_NEAR(static_cast<double>(count[0]), 0.8 * n, 1.0 + 1e-9);
    EXPECT_NEAR(static_cast<double>(count[1]), 0.1 * n, 1.0);
    EXPECT_NEAR(static_cast<double>(count[2]), 0.1 * n, 1.0);
    EXPECT_EQ(count[0] + count[1] + count[2], n);
  }
  EXPECT_EQ(make_split(50, 3), make_split(50, 3));
}

MotionDataset small_dataset(int clips, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MotionDataset d;
  for (int i = 0; i < clips; ++i) {
    d.clips.push_back(random_clip("clip" + std::to_string(i), 6 + i % 5, rng, i % 2 == 0, i % 3 == 0));
  }
  d.splits = make_split(d.size(), seed);
  d.stats = compute_normalization(d);
  return d;
}

TEST(Normalization, UsesTrainSplitOnly) {
  MotionDataset d = small_dataset(20, 8);
  const NormalizationStats before = d.stats;
  // Perturbing non-train clips must not move the statistics.
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.splits[i] == Split::kTrain) continue;
    FrameMatrix b = d.clips[i].body();
    b.array() += 100.0f;
    d.clips[i] = d.clips[i].with_channels(Modality::kBody, b);
  }
  const NormalizationStats after = compute_normalization(d);
  EXPECT_EQ(before.get(Modality::kBody).mean, after.get(Modality::kBody).mean);
  EXPECT_EQ(before.get(Modality::kBody).std, after.get(Modality::kBody).std);
}

TEST(Normalization, RoundTrip) {
  const MotionDataset d = small_dataset(12, 9);
  for (const auto& c : d.clips) {
    for (Modality m : kModalities) {
      if (!c.has(m)) continue;
      const FrameMatrix x = c.channels(m);
      const FrameMatrix back = d.stats.denormalize(m, d.stats.normalize(m, x));
      EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-5);
    }
  }
  for (int k = 0; k < 260; ++k) EXPECT_GE(d.stats.get(Modality::kBody).std[k], NormalizationStats::kStdFloor);
}

TEST(Mx1, ClipRoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(3);
  const MotionClip c = random_clip("walk_01", 9, rng, true, true);
  mx1::write_clip(dir.path(), c);
  EXPECT_TRUE(std::filesystem::exists(dir / "walk_01.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "walk_01.body.f32"));
  EXPECT_EQ(std::filesystem::file_size(dir / "walk_01.hand.f32"), 9u * 180u * 4u);
  const MotionClip back = mx1::read_clip(dir / "walk_01.json");
  EXPECT_EQ(back.id(), c.id());
  EXPECT_EQ(back.text(), c.text());
  EXPECT_EQ(back.body(), c.body());
  EXPECT_EQ(*back.hand(), *c.hand());
  EXPECT_EQ(*back.face(), *c.face());

  const auto header = read_json_file(dir / "walk_01.json");
  EXPECT_EQ(header.at("version"), 1);
  EXPECT_EQ(header.at("T"), 9);
  EXPECT_EQ(header.at("channel_widths"), nlohmann::json({260, 180, 56}));

  // Raw little-endian float32, row-major.
  const std::vector<char> raw = read_binary_file(dir / "walk_01.body.f32");
  float first = 0.0f;
  float second = 0.0f;
  std::memcpy(&first, raw.data(), 4);
  std::memcpy(&second, raw.data() + 4, 4);
  EXPECT_EQ(first, c.body()(0, 0));
  EXPECT_EQ(second, c.body()(0, 1));
}

TEST(Mx1, TruncatedBinaryIsMalformed) {
  TempDir dir;
  std::mt19937_64 rng(3);
  mx1::write_clip(dir.path(), random_clip("c", 5, rng, false, false));
  std::filesystem::resize_file(dir / "c.body.f32", 100);
  try {
    mx1::read_clip(dir / "c.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformed);
    EXPECT_NE(std::string(e.what()).find("c.body.f32"), std::string::npos);
  }
}

TEST(Mx1, BadHeaderIsMalformed) {
  TempDir dir;
  {
    std::ofstream(dir / "x.json") << "{\"version\": 1, \"id\": ";
  }
  EXPECT_EQ(error_code_of([&] { mx1::read_clip(dir / "x.json"); }), ErrorCode::kMalformed);
  {
    std::ofstream(dir / "y.json") << R"({"version": 2, "id": "y", "fps": 30, "T": 2,
      "modality_mask": [true,false,false], "channel_widths": [260,180,56], "text": []})";
  }
  EXPECT_EQ(error_code_of([&] { mx1::read_clip(dir / "y.json"); }), ErrorCode::kMalformed);
}

TEST(DatasetIo, DirectoryRoundTrip) {
  TempDir dir;
  const MotionDataset d = small_dataset(15, 4);
  write_dataset(dir.path(), d);
  EXPECT_TRUE(std::filesystem::exists(dir / "corpus.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir / "splits/train.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "skeleton.json"));
  const MotionDataset back = read_dataset(dir.path());
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.clips[i].id(), d.clips[i].id());
    EXPECT_EQ(back.splits[i], d.splits[i]);
    EXPECT_EQ(back.clips[i].body(), d.clips[i].body());
  }
  EXPECT_EQ(back.stats.get(Modality::kHand).mean, d.stats.get(Modality::kHand).mean);

  std::filesystem::remove(dir / "corpus.jsonl");
  EXPECT_EQ(error_code_of([&] { read_dataset(dir.path()); }), ErrorCode::kMissingSplit);
}

TEST(Skeleton, JsonRoundTripAndValidation) {
  const Skeleton& sk = Skeleton::canonical();
  const Skeleton back = skeleton_from_json(skeleton_to_json(sk));
  EXPECT_EQ(back.joint_names, sk.joint_names);
  EXPECT_EQ(back.mirror_map, sk.mirror_map);
  EXPECT_EQ(back.heel_toe_indices, sk.heel_toe_indices);
  for (int j = 0; j < sk.size(); ++j) EXPECT_EQ(sk.mirror_map[sk.mirror_map[j]], j);
  nlohmann::json bad = skeleton_to_json(sk);
  bad["mirror_map"][0] = 2;
  EXPECT_EQ(error_code_of([&] { skeleton_from_json(bad); }), ErrorCode::kMalformed);
}

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace t2mx::core
