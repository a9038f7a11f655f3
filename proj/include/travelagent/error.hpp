#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ta {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structured-text document does not match its schema. `path()` is a
/// JSON-pointer-like location of the offending field, e.g. `/objects/3/footprint`.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A document parsed but violates a domain invariant. `subject()` names the
/// offending object (scene object id, goal id, spawn id, ...).
class ValidationError : public Error {
 public:
  ValidationError(std::string subject, const std::string& what)
      : Error(subject + ": " + what), subject_(std::move(subject)) {}
  const std::string& subject() const noexcept { return subject_; }

 private:
  std::string subject_;
};

/// Decide-stage text does not follow the ACTION/LENGTH/ANGLE grammar.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration: unknown keys, missing script rules, missing frame sections.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A completion provider failed.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, int attempts = 1, bool retryable = false)
      : Error(what), attempts_(attempts), retryable_(retryable) {}
  int attempts() const noexcept { return attempts_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  int attempts_;
  bool retryable_;
};

/// A backend error raised while running one Chain-of-Thought stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Reading a trace file failed. `line()` is 1-based; 0 means file-level.
class TraceError : public Error {
 public:
  TraceError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ta
