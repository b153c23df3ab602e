#pragma once

#include <stdexcept>
#include <string>

namespace srattack {

// Base of every error the toolkit throws. The CLI maps the concrete type to
// an exit code, so pick the narrowest one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller (bad dims, bad box,
// unquantized samples, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents are malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration (backend/scale mismatch, missing weights, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace detail

}  // namespace srattack
