#pragma once

#include <stdexcept>
#include <string>

namespace naiad {

// Base for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class BoundError : public Error {
 public:
  using Error::Error;
};

// Well-formed payload with the wrong shape (e.g. two ad spans).
class StructureError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

// Numerically degenerate input: zero variance, zero vector, RSS = 0, ...
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// A write that contradicts already-stored state.
class Conflict : public Error {
 public:
  using Error::Error;
};

}  // namespace naiad
