#pragma once

#include <stdexcept>
#include <string>

namespace needle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input is degenerate (zero function, zero norm) so the check is undefined.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class MassMismatchError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace needle
