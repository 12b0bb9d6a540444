#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "abstain/core/types.h"

namespace abstain {

// Persistent key -> JSON value store backed by an append-only line file
// ({"key":...,"value":...} per line). Concurrent readers, serialized appends.
// An empty path keeps the cache in memory only.
//
// A torn final line (process killed mid-append) is truncated away on load.
class AppendOnlyCache {
 public:
  AppendOnlyCache() = default;
  explicit AppendOnlyCache(std::filesystem::path path);

  AppendOnlyCache(const AppendOnlyCache&) = delete;
  AppendOnlyCache& operator=(const AppendOnlyCache&) = delete;

  std::optional<Json> get(const std::string& key) const;

  /// First write wins; a repeated key is ignored so the file stays stable.
  void put(const std::string& key, const Json& value);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Json> entries_;
  std::ofstream out_;
};

}  // namespace abstain
