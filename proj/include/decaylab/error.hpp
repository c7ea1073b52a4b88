#pragma once

#include <stdexcept>
#include <string>

namespace decaylab {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration or arguments outside an operation's domain.
struct config_error : error {
  using error::error;
};

/// Shape, grid, or component mismatch between operands.
struct shape_error : error {
  using error::error;
};

/// Non-finite state detected during time integration.
struct instability_error : error {
  using error::error;
};

}  // namespace decaylab
