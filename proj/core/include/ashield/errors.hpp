#pragma once

#include <stdexcept>

namespace ashield {

// Error taxonomy shared by the whole pipeline. The CLI maps these onto
// process exit codes (config 2, io 3, numerical 4).
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ashield
