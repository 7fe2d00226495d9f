#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpnn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (OFF, XYZ, manifests, config files). Carries the
/// 1-based line number the problem was detected on.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Malformed binary input (field files, checkpoints).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Geometric input that cannot be processed (zero extent, empty grids).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// API misuse: shape mismatches, backward before forward.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values encountered during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpnn
