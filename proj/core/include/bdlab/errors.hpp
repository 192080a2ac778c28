#pragma once

#include <stdexcept>

namespace bdlab {

// Malformed or inconsistent input data: bad TSV rows, label space
// mismatches, infeasible poisoning requests, empty selections.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite quantity (diverged optimizer, bad config).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bdlab
