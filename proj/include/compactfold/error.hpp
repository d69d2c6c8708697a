#pragma once

#include <stdexcept>
#include <string>

namespace compactfold {

// Base class for all recoverable failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, sequences, paths).
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad command-line or configuration input; the CLI maps this to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace compactfold
