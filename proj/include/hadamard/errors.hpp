#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace hadamard {

/// Violated precondition on an argument (sizes, ranges, orders).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mathematical domain violation (pole of Gamma, t <= a, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An adaptive scheme could not reach the requested tolerance.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Base for errors that point at a character offset in expression source.
class PositionedError : public std::runtime_error {
 public:
  PositionedError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at offset " + std::to_string(position)),
        message_(what),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }
  /// what() without the position suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t position_;
};

class LexError : public PositionedError {
 public:
  using PositionedError::PositionedError;
};

class ParseError : public PositionedError {
 public:
  using PositionedError::PositionedError;
};

class EvalError : public PositionedError {
 public:
  using PositionedError::PositionedError;
  EvalError(const std::string& what, std::size_t position, std::size_t node)
      : PositionedError(what + " (grid node " + std::to_string(node) + ")", position),
        node_(node) {}
  /// Grid node at which the expression was being evaluated, if known.
  std::optional<std::size_t> node() const noexcept { return node_; }

 private:
  std::optional<std::size_t> node_;
};

/// Invalid run configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& constraint)
      : std::runtime_error("config key '" + key + "': " + constraint), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace hadamard
