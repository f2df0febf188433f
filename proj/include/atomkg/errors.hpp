#pragma once

#include <stdexcept>
#include <string>

namespace atomkg {

// Base class for every condition the library throws on purpose, so callers
// can catch one type at the boundary and still report precise messages.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Formula text rejected by the parser.  `offset` is the byte index of the
// offending character in the input string.
struct ParseError : Error {
  ParseError(const std::string& message, std::size_t at)
      : Error(message + " (byte " + std::to_string(at) + ")"), offset(at) {}
  std::size_t offset;
};

// A formula mentions a variable that is not part of the world space it is
// being evaluated against.
struct ScopeError : Error {
  using Error::Error;
};

// A documented size cap was exceeded (world-space width, clause-enumeration
// width, and similar guards against accidental exponential blowups).
struct CapError : Error {
  using Error::Error;
};

// Command- or configuration-level misuse: bad mode combination, missing
// required input, malformed config file.
struct UsageError : Error {
  using Error::Error;
};

}  // namespace atomkg
