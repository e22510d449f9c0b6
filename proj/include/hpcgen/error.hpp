#pragma once

#include <stdexcept>
#include <string>

namespace hpcgen {

// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Array dimensions disagree with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A file could not be read or does not follow its container format.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented invariant (skinning rows, kinematic tree, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced during a numeric evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Degenerate point configuration for similarity alignment.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Wire payload does not follow the backend protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Backend unreachable, timed out or answered with an error status.
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace hpcgen
