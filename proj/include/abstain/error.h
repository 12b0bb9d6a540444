#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abstain {

// Base for every error raised by the toolkit. Callers that only need to
// report a failure catch this; the subclasses carry structured payloads.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent line in a record file. line() is 1-based.
class RecordError : public Error {
 public:
  RecordError(std::string path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Network failure, timeout, or non-success status after all retries.
class BackendError : public Error {
 public:
  using Error::Error;
};

class UnrecognizedVerdict : public Error {
 public:
  explicit UnrecognizedVerdict(std::string raw)
      : Error("unrecognized entailment verdict: '" + raw + "'"), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class JudgeParseError : public Error {
 public:
  explicit JudgeParseError(std::string raw)
      : Error("judge reply is neither yes nor no: '" + raw + "'"), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class EmptyCompletion : public Error {
 public:
  using Error::Error;
};

}  // namespace abstain
