#pragma once

#include <stdexcept>

namespace qinfer {

// Bad or inconsistent user configuration; the CLI exits with code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure while reading or writing artifacts; exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qinfer
