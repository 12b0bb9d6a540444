#include "abstain/core/append_cache.h"

#include <spdlog/spdlog.h>

#include "abstain/core/record_io.h"
#include "abstain/error.h"

namespace abstain {

AppendOnlyCache::AppendOnlyCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty()) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (std::filesystem::exists(path_)) {
    auto contents = read_file(path_);
    if (!contents.empty() && contents.back() != '\n') {
      const auto keep = contents.rfind('\n') == std::string::npos ? 0 : contents.rfind('\n') + 1;
      spdlog::warn("{}: dropping torn final cache line", path_.string());
      contents.resize(keep);
      std::filesystem::resize_file(path_, keep);
    }
    const auto lines = split_lines(contents);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        auto entry = Json::parse(lines[i]);
        entries_.try_emplace(entry.at("key").get<std::string>(), entry.at("value"));
      } catch (const Json::exception&) {
        throw RecordError(path_.string(), i + 1, "corrupt cache entry");
      }
    }
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open cache " + path_.string() + " for append");
}

std::optional<Json> AppendOnlyCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void AppendOnlyCache::put(const std::string& key, const Json& value) {
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(key, value);
  if (!inserted || !out_.is_open()) return;
  Json line{{"key", key}, {"value", value}};
  out_ << line.dump() << '\n';
  out_.flush();
}

std::size_t AppendOnlyCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace abstain
