#pragma once

#include <stdexcept>
#include <string>

namespace gaqq {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (dimension mismatch,
// bad labels, out-of-range argument, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A matrix required to be positive definite was not.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// A matrix required to be positive semi-definite had an eigenvalue
// below the tolerated negative floor.
class NotPositiveSemiDefinite : public Error {
 public:
  using Error::Error;
};

// Malformed cell or row in an input file; message names the location.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid model file (missing fields, wrong types, truncation).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Model file with a format_version this build does not understand.
class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

// Every (lambda1, lambda2) candidate failed to fit.
class TuningFailed : public Error {
 public:
  using Error::Error;
};

// Every replication of a benchmark failed.
class BenchmarkFailed : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure (missing file, unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaqq
