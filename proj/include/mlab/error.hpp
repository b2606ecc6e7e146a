#pragma once

#include <stdexcept>
#include <string>

namespace mlab {

/// Base class of every error raised by the library. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input (malformed parameter, violated precondition).
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Index outside the range covered by a precomputed table.
class RangeError : public Error {
  public:
    using Error::Error;
};

/// A configured budget (memory, search box, grid size) would be exceeded.
class ResourceError : public Error {
  public:
    using Error::Error;
};

/// A parameter profile that is well-formed but yields an empty object.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Exact rational arithmetic left its 128-bit envelope.
class PrecisionError : public Error {
  public:
    using Error::Error;
};

/// An internal identity that must hold exactly did not.
class ConsistencyError : public Error {
  public:
    using Error::Error;
};

/// Finite search could not decide between the two branches of a dichotomy.
class InconclusiveError : public Error {
  public:
    using Error::Error;
};

/// A decomposition failed one of its certification checks.
class CertificationError : public Error {
  public:
    using Error::Error;
};

} // namespace mlab
