#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qfeat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (range, shape, parity).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A construction would exceed a configured point or constraint cap.
class SizeError : public Error {
 public:
  SizeError(const std::string& what, double requested, double cap)
      : Error(what + ": requested " + std::to_string(requested) + " exceeds cap " +
              std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}

  double requested() const noexcept { return requested_; }
  double cap() const noexcept { return cap_; }

 private:
  double requested_;
  double cap_;
};

/// An iterative method ran out of its iteration budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

/// An input object does not satisfy the contract of the operation
/// (e.g. subsampling a rule that has negative weights).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Embedding was requested for a rule with negative weights.
class UnsupportedEmbedding : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Unknown or invalid key in a sweep configuration.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key)
      : Error(what + ": '" + key + "'"), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace qfeat
