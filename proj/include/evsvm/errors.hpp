#pragma once

#include <stdexcept>

namespace evsvm {

/// Malformed or inconsistent input data (files, datasets, serialized models).
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric degeneracy that prevents a well-defined result.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace evsvm
