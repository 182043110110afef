#pragma once

// MX1 motion container.
//
// One clip = `<id>.json` header
//   {"version": 1, "id", "fps", "T", "modality_mask": [body, hand, face],
//    "channel_widths": [260, 180, 56], "text": [...]}
// plus one raw little-endian float32 file per present modality,
// `<id>.<modality>.f32`, row-major T x d.
//
// The text corpus is JSONL, one {"id", "text", "split"} object per line and
// per description.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2mx/core/clip.hpp"

namespace t2mx::core::mx1 {

namespace fs = std::filesystem;

inline constexpr int kVersion = 1;

struct Header {
  std::string id;
  double fps = 30.0;
  int frames = 0;
  ModalityMask mask{true, false, false};
  std::vector<std::string> text;
};

nlohmann::json header_to_json(const Header& header);
/// Throws kMalformed on missing keys, wrong version or widths.
Header header_from_json(const nlohmann::json& j);
Header header_of(const MotionClip& clip);

void write_float32(const fs::path& path, const FrameMatrix& m);
/// Throws kMalformed naming the file when its size is not rows*cols*4 bytes.
FrameMatrix read_float32(const fs::path& path, int rows, int cols);

/// Writes header and binaries into `dir` (created if needed).
void write_clip(const fs::path& dir, const MotionClip& clip);
/// Reads a clip given its header path.
MotionClip read_clip(const fs::path& header_path);

/// Header files (`*.json` with an MX1 version field) in `dir`, sorted by name.
std::vector<fs::path> list_headers(const fs::path& dir);

struct CorpusEntry {
  std::string id;
  std::string text;
  Split split = Split::kTrain;
};

void write_corpus(const fs::path& path, const std::vector<CorpusEntry>& entries);
std::vector<CorpusEntry> read_corpus(const fs::path& path);

}  // namespace t2mx::core::mx1
