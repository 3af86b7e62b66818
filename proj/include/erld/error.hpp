#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace erld {

/// Base for every error raised by the library. `kind()` is a stable short tag
/// used in machine-readable CLI error lines.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual std::string_view kind() const noexcept { return "error"; }
};

/// Malformed corpus record. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::string_view kind() const noexcept override { return "parse"; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] std::string_view kind() const noexcept override { return "config"; }
};

/// Invalid argument to an operation (empty merge, unknown graph node, coverage mismatch).
class InputError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] std::string_view kind() const noexcept override { return "input"; }
};

/// Persisted state problems: version mismatch, corruption, stale config, lock held.
class StateError : public Error {
 public:
  enum class Reason { version, corruption, stale, locked, invariant, io };

  StateError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  [[nodiscard]] std::string_view kind() const noexcept override {
    switch (reason_) {
      case Reason::version: return "state-version";
      case Reason::corruption: return "state-corruption";
      case Reason::stale: return "state-stale";
      case Reason::locked: return "state-locked";
      case Reason::invariant: return "state-invariant";
      case Reason::io: return "state-io";
    }
    return "state";
  }
  [[nodiscard]] Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

}  // namespace erld
