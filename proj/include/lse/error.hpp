#pragma once

#include <stdexcept>
#include <string>

namespace lse {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (triple files, reports, config lines).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value (dimension, counts, flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Ids, shapes or vocabularies that do not agree with each other.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lse
