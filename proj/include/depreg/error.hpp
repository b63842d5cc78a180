#pragma once

#include <stdexcept>
#include <string>

namespace depreg {

// Bad inputs: shapes, ranges, malformed configuration. CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite objectives, failed iterations. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataErrorKind {
  malformed_row,
  duplicate_id,
  dangling_edge,
  overlapping_splits,
  missing_file,
};

class DataError : public ConfigError {
 public:
  DataError(DataErrorKind kind, const std::string& what)
      : ConfigError(what), kind_(kind) {}
  DataErrorKind kind() const noexcept { return kind_; }

 private:
  DataErrorKind kind_;
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace depreg
