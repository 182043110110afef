#include "t2mx/core/dataset_io.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/mx1.hpp"
#include "t2mx/core/skeleton.hpp"

namespace t2mx::core {

namespace fs = std::filesystem;

nlohmann::json stats_to_json(const NormalizationStats& stats) {
  nlohmann::json j = nlohmann::json::object();
  for (Modality m : kModalities) {
    const ChannelStats& s = stats.get(m);
    if (s.empty()) continue;
    j[std::string(modality_name(m))] = {
        {"mean", std::vector<float>(s.mean.data(), s.mean.data() + s.mean.size())},
        {"std", std::vector<float>(s.std.data(), s.std.data() + s.std.size())}};
  }
  return j;
}

NormalizationStats stats_from_json(const nlohmann::json& j) {
  NormalizationStats stats;
  try {
    for (Modality m : kModalities) {
      const std::string name(modality_name(m));
      if (!j.contains(name)) continue;
      const auto mean = j.at(name).at("mean").get<std::vector<float>>();
      const auto std = j.at(name).at("std").get<std::vector<float>>();
      require(static_cast<int>(mean.size()) == channel_width(m) && mean.size() == std.size(),
              ErrorCode::kMalformed, "normalization width for " + name);
      ChannelStats& s = stats.per_modality[index_of(m)];
      s.mean = Eigen::Map<const Eigen::VectorXf>(mean.data(), static_cast<Eigen::Index>(mean.size()));
      s.std = Eigen::Map<const Eigen::VectorXf>(std.data(), static_cast<Eigen::Index>(std.size()));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformed, std::string("normalization json: ") + e.what());
  }
  return stats;
}

void write_dataset(const fs::path& dir, const MotionDataset& dataset) {
  fs::create_directories(dir / "clips");
  std::vector<mx1::CorpusEntry> corpus;
  std::map<Split, std::ostringstream> manifests;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) manifests[s];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const MotionClip& clip = dataset.clips[i];
    mx1::write_clip(dir / "clips", clip);
    for (const auto& t : clip.text()) corpus.push_back({clip.id(), t, dataset.splits[i]});
    manifests[dataset.splits[i]] << clip.id() << "\n";
  }
  mx1::write_corpus(dir / "corpus.jsonl", corpus);
  for (auto& [split, ss] : manifests) {
    write_file_atomic(dir / "splits" / (std::string(split_name(split)) + ".txt"), ss.str());
  }
  write_json_atomic(dir / "normalization.json", stats_to_json(dataset.stats));
  write_json_atomic(dir / "skeleton.json", skeleton_to_json(Skeleton::canonical()));
}

std::vector<MotionClip> read_clip_directory(const fs::path& dir) {
  std::vector<MotionClip> clips;
  for (const auto& header : mx1::list_headers(dir)) clips.push_back(mx1::read_clip(header));
  return clips;
}

MotionDataset read_dataset(const fs::path& dir) {
  require(fs::is_directory(dir / "clips"), ErrorCode::kMalformed,
          "dataset " + dir.string() + " has no clips/ directory");
  require(fs::exists(dir / "corpus.jsonl"), ErrorCode::kMissingSplit,
          "dataset " + dir.string() + " has no corpus.jsonl");
  // Clips keep the order in which the corpus first names them.
  std::map<std::string, std::pair<std::size_t, Split>> split_of;
  for (const auto& e : mx1::read_corpus(dir / "corpus.jsonl")) {
    split_of.try_emplace(e.id, split_of.size(), e.split);
  }

  std::vector<std::pair<std::size_t, MotionClip>> loaded;
  for (auto& clip : read_clip_directory(dir / "clips")) {
    const auto it = split_of.find(clip.id());
    require(it != split_of.end(), ErrorCode::kMissingSplit,
            "clip " + clip.id() + " has no split in corpus.jsonl");
    loaded.emplace_back(it->second.first, std::move(clip));
  }
  std::sort(loaded.begin(), loaded.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  MotionDataset out;
  for (auto& [order, clip] : loaded) {
    out.splits.push_back(split_of.at(clip.id()).second);
    out.clips.push_back(std::move(clip));
  }
  if (fs::exists(dir / "normalization.json")) {
    out.stats = stats_from_json(read_json_file(dir / "normalization.json"));
  } else {
    out.stats = compute_normalization(out);
  }
  return out;
}

}  // namespace t2mx::core
