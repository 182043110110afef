#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "t2mx/core/error.hpp"

namespace t2mx::core {

/// Reads optional keys from a JSON object; `finish()` rejects keys that were
/// never read. Every failure raises kConfig with the dotted key path.
class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& j, std::string context) : j_(j), context_(std::move(context)) {
    require(j_.is_object(), ErrorCode::kConfig, context_ + " must be a JSON object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& ex) {
      raise(ErrorCode::kConfig, path(key) + ": " + ex.what());
    }
  }

  /// Sub-object for nested parsing; null when absent.
  const nlohmann::json* child(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return context_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      require(seen_.count(item.key()) > 0, ErrorCode::kConfig, "unknown key '" + path(item.key()) + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace t2mx::core
