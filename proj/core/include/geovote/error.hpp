#pragma once

#include <stdexcept>
#include <string>

namespace geovote {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Aggregation over a polytope with no rows.
class EmptyEnsembleError : public Error {
 public:
  using Error::Error;
};

/// Solve requested on a normal system that has seen no instances.
class EmptySystemError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a violated numeric invariant (e.g. a score vector
/// that does not sum to one).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A CSV label that the schema's dictionary does not know.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Prequential evaluation on a stream that produced no records.
class EmptyStreamError : public Error {
 public:
  using Error::Error;
};

}  // namespace geovote
