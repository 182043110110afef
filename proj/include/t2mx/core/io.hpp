#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace t2mx::core {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path);
std::vector<char> read_binary_file(const fs::path& path);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view bytes);
void write_json_atomic(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const fs::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);
/// Hash over the sorted relative paths and contents of every regular file
/// under `dir`, skipping names listed in `exclude`.
std::string sha256_tree(const fs::path& dir, const std::vector<std::string>& exclude = {});

}  // namespace t2mx::core
