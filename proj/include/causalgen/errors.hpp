#pragma once

#include <stdexcept>
#include <string>

namespace causalgen {

// Unreadable/malformed input files and data-format violations. The CLI maps
// this (and any other library exception) to exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace causalgen
