#pragma once

#include <stdexcept>

namespace qmem {

// Thrown when an operation would exceed an explicit resource budget
// (search nodes, distinct part sizes of a tensor power, ...).  Callers that
// can degrade gracefully catch this and report an inconclusive result.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qmem
