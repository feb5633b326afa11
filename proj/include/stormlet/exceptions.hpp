#pragma once

#include <stdexcept>
#include <string>

namespace stormlet {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(std::string const& message) : std::runtime_error(message) {}
};

/// Malformed input text or files (PRISM source, properties, model JSON).
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Structurally invalid models, schedulers or configurations.
class ModelError : public Error {
  public:
    using Error::Error;
};

/// Recognized but deliberately unsupported features or queries.
class UnsupportedError : public Error {
  public:
    using Error::Error;
};

/// Numeric solver exceeded its iteration budget.
class ConvergenceError : public Error {
  public:
    using Error::Error;
};

/// File system access failures.
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace stormlet
