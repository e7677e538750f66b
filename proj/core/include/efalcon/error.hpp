#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace efalcon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArmError : public Error {
 public:
  using Error::Error;
};

/// Configuration or argument validation failure. Carries one message per
/// offending field so callers can report all of them at once.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  explicit ConfigError(const std::string& problem)
      : ConfigError(std::vector<std::string>{problem}) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// A numerical routine failed to converge (dual bracket overflow, etc).
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Agent was driven out of order (round outside the current epoch).
class SequencingError : public Error {
 public:
  using Error::Error;
};

/// An inverse-probability estimate met a zero probability.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace efalcon
