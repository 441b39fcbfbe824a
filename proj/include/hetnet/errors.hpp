#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hetnet {

/// Invalid configuration or arguments (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver could not produce a feasible allocation. Carries the ids of the
/// users that block feasibility, when the solver can name them.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::vector<int> blocking_users = {})
      : std::runtime_error(what), blocking_users_(std::move(blocking_users)) {}

  const std::vector<int>& blocking_users() const { return blocking_users_; }

 private:
  std::vector<int> blocking_users_;
};

/// Exhaustive enumeration refused because the instance is too large.
class TooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training data with a single label.
class DegenerateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InteriorStartFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hetnet
