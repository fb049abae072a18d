#pragma once

#include <stdexcept>
#include <string>

namespace parfilter {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoundError : Error {
  using Error::Error;
};

struct BoundMismatchError : Error {
  using Error::Error;
};

struct EmptyInputError : Error {
  using Error::Error;
};

struct OverflowError : Error {
  using Error::Error;
};

struct InputError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct NotDisjointError : Error {
  using Error::Error;
};

struct InvalidRefutationError : Error {
  using Error::Error;
};

// Carries the index of the offending member set.
struct NoGeneratorError : Error {
  explicit NoGeneratorError(int index, const std::string& what)
      : Error(what), index(index) {}
  int index;
};

struct BudgetExhaustedError : Error {
  using Error::Error;
};

struct CacheConflictError : Error {
  using Error::Error;
};

}  // namespace parfilter
