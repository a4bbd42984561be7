#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace framethinker {

/// Configuration problems: bad flags, unknown keys, invalid presets. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data (task corpora, trajectory logs, CSV). CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  /// 1-based line number of the offending record, 0 when not line-oriented.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite ratios or gradients during optimization. CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace framethinker
