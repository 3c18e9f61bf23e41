#pragma once

#include <stdexcept>

namespace dpplab {

// Base class so callers can catch library errors in one clause.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument contents: asymmetry, bad spectrum, malformed subsets.
struct ValidationError : Error {
  using Error::Error;
};

// Ground size above a hard cap for the requested operation.
struct CapacityError : Error {
  using Error::Error;
};

// Factorization failure or numerical breakdown inside an algorithm.
struct NumericError : Error {
  using Error::Error;
};

// File parse or format problems.
struct IoError : Error {
  using Error::Error;
};

}  // namespace dpplab
