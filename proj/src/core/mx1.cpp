#include "t2mx/core/mx1.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"

namespace t2mx::core::mx1 {

static_assert(std::endian::native == std::endian::little,
              "MX1 binaries are little-endian; add byte swapping for big-endian hosts");

nlohmann::json header_to_json(const Header& h) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["id"] = h.id;
  j["fps"] = h.fps;
  j["T"] = h.frames;
  j["modality_mask"] = h.mask;
  j["channel_widths"] = {channel_width(Modality::kBody), channel_width(Modality::kHand),
                         channel_width(Modality::kFace)};
  j["text"] = h.text;
  return j;
}

Header header_from_json(const nlohmann::json& j) {
  Header h;
  try {
    const int version = j.at("version").get<int>();
    require(version == kVersion, ErrorCode::kMalformed,
            "unsupported MX1 version " + std::to_string(version));
    h.id = j.at("id").get<std::string>();
    h.fps = j.at("fps").get<double>();
    h.frames = j.at("T").get<int>();
    h.mask = j.at("modality_mask").get<ModalityMask>();
    const auto widths = j.at("channel_widths").get<std::array<int, 3>>();
    for (Modality m : kModalities) {
      require(widths[index_of(m)] == channel_width(m), ErrorCode::kMalformed,
              "channel width mismatch for " + std::string(modality_name(m)));
    }
    h.text = j.at("text").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformed, std::string("MX1 header: ") + e.what());
  }
  require(h.mask[0], ErrorCode::kMalformed, "MX1 clip " + h.id + " lacks body channels");
  require(h.frames >= 1, ErrorCode::kMalformed, "MX1 clip " + h.id + " has no frames");
  require(h.fps > 0.0, ErrorCode::kMalformed, "MX1 clip " + h.id + " has non-positive fps");
  return h;
}

Header header_of(const MotionClip& clip) {
  Header h;
  h.id = clip.id();
  h.fps = clip.fps();
  h.frames = clip.frames();
  h.mask = clip.modality_mask();
  h.text = clip.text();
  return h;
}

void write_float32(const fs::path& path, const FrameMatrix& m) {
  std::string bytes(static_cast<std::size_t>(m.size()) * sizeof(float), '\0');
  if (m.size() > 0) std::memcpy(bytes.data(), m.data(), bytes.size());
  write_file_atomic(path, bytes);
}

FrameMatrix read_float32(const fs::path& path, int rows, int cols) {
  require(fs::exists(path), ErrorCode::kMalformed, "missing binary " + path.string());
  const auto expected = static_cast<std::uintmax_t>(rows) * cols * sizeof(float);
  const auto actual = fs::file_size(path);
  require(actual == expected, ErrorCode::kMalformed,
          path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
              std::to_string(actual));
  const std::vector<char> data = read_binary_file(path);
  FrameMatrix m(rows, cols);
  if (!data.empty()) std::memcpy(m.data(), data.data(), data.size());
  require(m.allFinite(), ErrorCode::kMalformed, path.string() + ": non-finite values");
  return m;
}

void write_clip(const fs::path& dir, const MotionClip& clip) {
  fs::create_directories(dir);
  for (Modality m : kModalities) {
    if (!clip.has(m)) continue;
    write_float32(dir / (clip.id() + "." + std::string(modality_name(m)) + ".f32"), clip.channels(m));
  }
  write_json_atomic(dir / (clip.id() + ".json"), header_to_json(header_of(clip)));
}

MotionClip read_clip(const fs::path& header_path) {
  Header h;
  try {
    h = header_from_json(read_json_file(header_path));
  } catch (const Error& e) {
    raise(ErrorCode::kMalformed, header_path.string() + ": " + e.what());
  }
  const fs::path dir = header_path.parent_path();
  auto load = [&](Modality m) -> std::optional<FrameMatrix> {
    if (!h.mask[index_of(m)]) return std::nullopt;
    return read_float32(dir / (h.id + "." + std::string(modality_name(m)) + ".f32"), h.frames,
                        channel_width(m));
  };
  std::optional<FrameMatrix> body = load(Modality::kBody);
  return MotionClip(h.id, h.fps, std::move(*body), load(Modality::kHand), load(Modality::kFace),
                    h.text);
}

std::vector<fs::path> list_headers(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    try {
      const auto j = nlohmann::json::parse(read_text_file(entry.path()));
      if (j.is_object() && j.contains("version") && j.contains("channel_widths")) {
        out.push_back(entry.path());
      }
    } catch (const nlohmann::json::exception&) {
      // Unparseable JSON is reported by read_clip when it is a header.
      if (entry.path().string().find(".mx1") != std::string::npos) out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_corpus(const fs::path& path, const std::vector<CorpusEntry>& entries) {
  std::ostringstream ss;
  for (const auto& e : entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["text"] = e.text;
    j["split"] = std::string(split_name(e.split));
    ss << j.dump() << "\n";
  }
  write_file_atomic(path, ss.str());
}

std::vector<CorpusEntry> read_corpus(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<CorpusEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                     split_from_name(j.at("split").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::kMalformed,
            path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace t2mx::core::mx1
