#pragma once

#include <concepts>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "abstain/core/types.h"
#include "abstain/error.h"

namespace abstain {

// Record files hold one compact JSON object per line, UTF-8, '\n' terminated.
template <typename T>
concept Record = requires(const T& record, Json& json) {
  { validate(record) };
  { record_key(record) } -> std::same_as<std::optional<std::string>>;
  { to_json(json, record) };
};

/// Reads a whole file. Throws Error if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and rename, holding an advisory lock
/// on `<path>.lock` for the duration so concurrent writers serialize.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

/// Splits on '\n'. A final unterminated line counts; a trailing '\n' does not
/// produce an extra empty line.
std::vector<std::string> split_lines(std::string_view text);

template <Record T>
std::string to_line(const T& record) {
  Json json;
  to_json(json, record);
  return json.dump();
}

/// Parses every line; any malformed, invalid, or duplicate-keyed line rejects
/// the whole input with a RecordError naming the 1-based line.
template <Record T>
std::vector<T> parse_records(std::string_view text, const std::string& origin) {
  std::vector<T> records;
  std::unordered_map<std::string, std::size_t> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    T record;
    try {
      record = Json::parse(lines[i]).template get<T>();
      validate(record);
    } catch (const Json::exception& e) {
      throw RecordError(origin, line_no, std::string("malformed record: ") + e.what());
    } catch (const ValidationError& e) {
      throw RecordError(origin, line_no, e.what());
    }
    if (auto key = record_key(record)) {
      auto [it, inserted] = seen.emplace(*key, line_no);
      if (!inserted) {
        throw RecordError(origin, line_no,
                          "duplicate id '" + *key + "' (first seen on line " +
                              std::to_string(it->second) + ")");
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

template <Record T>
std::vector<T> load_records(const std::filesystem::path& path) {
  return parse_records<T>(read_file(path), path.string());
}

template <Record T>
std::string serialize_records(std::span<const T> records) {
  std::string out;
  for (const auto& record : records) {
    validate(record);
    out += to_line(record);
    out += '\n';
  }
  return out;
}

template <Record T>
void store_records(const std::filesystem::path& path, std::span<const T> records) {
  write_file_atomically(path, serialize_records(records));
}

template <Record T>
void store_records(const std::filesystem::path& path, const std::vector<T>& records) {
  store_records(path, std::span<const T>(records));
}

}  // namespace abstain
