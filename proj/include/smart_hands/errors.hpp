#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace smart_hands {

/// Base for every pipeline failure. `code()` is a stable snake_case tag used
/// in diagnostics and CLI error output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config_error", field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class OutOfOrderFrame : public Error {
 public:
  explicit OutOfOrderFrame(const std::string& what)
      : Error("out_of_order_frame", what) {}
};

class BufferOverflow : public Error {
 public:
  explicit BufferOverflow(const std::string& what)
      : Error("buffer_overflow", what) {}
};

class NoDriverDetected : public Error {
 public:
  explicit NoDriverDetected(const std::string& what)
      : Error("no_driver_detected", what) {}
};

class NoValidCrop : public Error {
 public:
  explicit NoValidCrop(const std::string& what)
      : Error("no_valid_crop", what) {}
};

/// A backend returned something outside its declared contract.
class BackendContract : public Error {
 public:
  explicit BackendContract(const std::string& what)
      : Error("backend_contract", what) {}
};

class EmptyMatrix : public Error {
 public:
  explicit EmptyMatrix(const std::string& what)
      : Error("empty_matrix", what) {}
};

class NoGroundTruth : public Error {
 public:
  explicit NoGroundTruth(const std::string& what)
      : Error("no_ground_truth", what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what)
      : Error("insufficient_data", what) {}
};

/// Malformed textual input (config, script, CSV). `line()` is 1-based;
/// 0 means the location is unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("parse_error", "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Malformed manifest content; carries the offending tick-record index.
class ManifestError : public Error {
 public:
  ManifestError(std::size_t record, const std::string& what)
      : Error("manifest_error",
              "record " + std::to_string(record) + ": " + what),
        record_(record) {}

  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

}  // namespace smart_hands
