#pragma once

#include <stdexcept>
#include <string>

namespace bcfeed {

// Thrown when a computation produces a numerically invalid result
// (non-finite integrand, non-PD matrix, ...). Validation problems with
// inputs use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bcfeed
