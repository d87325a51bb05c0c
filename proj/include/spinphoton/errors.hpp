#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spinphoton {

/// Invalid or inconsistent run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input data such as a bad tag line (CLI exit code 3).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg, std::size_t line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")"
                                    : msg),
        line_number(line) {}
  std::size_t line_number = 0;
};

}  // namespace spinphoton
