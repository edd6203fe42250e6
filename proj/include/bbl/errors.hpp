#pragma once

#include <stdexcept>
#include <string>

namespace bbl {

// Base of every error raised by the library. The CLI maps all of these to
// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// A geodesic extension left the region where it is well defined.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Non-unique geodesic (antipodal points on the sphere).
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

class FocalPointError : public Error {
 public:
  using Error::Error;
};

class DegenerateMapError : public Error {
 public:
  using Error::Error;
};

class MassMismatchError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bbl
