#pragma once

#include <stdexcept>
#include <string>

namespace ebi {

// Base for every domain failure surfaced by the library. The CLI maps these to
// exit code 1; UsageError maps to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class HashMismatchError : public IoError {
 public:
  using IoError::IoError;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class CacheMissError : public BackendError {
 public:
  using BackendError::BackendError;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebi
