#pragma once

// Dataset directory layout:
//   clips/<id>.json, clips/<id>.<modality>.f32   MX1 clips
//   corpus.jsonl                                 {id, text, split} per description
//   splits/{train,val,test}.txt                  clip ids, one per line
//   normalization.json                           training-split channel statistics
//   skeleton.json                                joint table used by every channel

#include <filesystem>

#include <json.hpp>

#include "t2mx/core/clip.hpp"

namespace t2mx::core {

nlohmann::json stats_to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const nlohmann::json& j);

void write_dataset(const std::filesystem::path& dir, const MotionDataset& dataset);

/// Reads clips, split tags and statistics. Throws kMalformed naming the
/// offending file, kMissingSplit when corpus/split manifests are absent.
MotionDataset read_dataset(const std::filesystem::path& dir);

/// Loads every MX1 clip found directly in `dir` (no split information).
std::vector<MotionClip> read_clip_directory(const std::filesystem::path& dir);

}  // namespace t2mx::core
