#pragma once

#include <stdexcept>
#include <string>

namespace imdel {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a search exceeds its configured node or size budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FamilyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A shipped constant (bF, cF, ...) turned out not to hold on this input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace imdel
