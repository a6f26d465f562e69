#pragma once

#include <stdexcept>

namespace cptc {

// Bad configuration or arguments. Surfaces as CPTC_E_INVALID / exit code 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Filesystem and data-format failures. Surfaces as CPTC_E_IO / exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cptc
