#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sefd {

// Base of every error the engine raises on purpose. The CLI maps each
// subclass onto a stable exit code (see exit_code_for).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or presets; raised before any text is processed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input files, or contract violations on input data
// (dimension mismatch, zero vectors, duplicate ids).
class InputError : public Error {
 public:
  using Error::Error;
};

// A text whose raw score or embedding cannot be resolved.
class MissingDataError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised while processing the text at `index` of a stream.
// The message of the original error is preserved; kind() tells which class
// it came from so exit codes survive the wrapping.
class StreamError : public Error {
 public:
  enum class Kind { Config, Input, MissingData, Runtime };

  StreamError(std::size_t index, std::string id, Kind kind, const std::string& what)
      : Error("text #" + std::to_string(index) + " (id '" + id + "'): " + what),
        index_(index),
        id_(std::move(id)),
        kind_(kind) {}

  std::size_t index() const { return index_; }
  const std::string& id() const { return id_; }
  Kind kind() const { return kind_; }

 private:
  std::size_t index_;
  std::string id_;
  Kind kind_;
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kConfig = 2;
inline constexpr int kInput = 3;
inline constexpr int kMissingData = 4;
inline constexpr int kRuntime = 5;
}  // namespace exit_code

}  // namespace sefd
