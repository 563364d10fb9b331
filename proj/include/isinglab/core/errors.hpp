#pragma once

#include <stdexcept>
#include <string>

namespace isinglab {

// Two objects that must live on the same lattice region do not.
struct RegionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An exact routine was asked to enumerate more than it is allowed to.
struct SizeCapExceeded : std::length_error {
  using std::length_error::length_error;
};

// A contour family that is not compatible with the graph or with the
// boundary condition it is asked to reconstruct from.
struct CompatibilityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stochastic routine ran out of its time or event budget.
struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A checkpoint whose content hash does not match, or that belongs to a
// different task.
struct CorruptCheckpoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace isinglab
