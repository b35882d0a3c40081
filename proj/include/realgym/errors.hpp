#pragma once

#include <stdexcept>
#include <string>

namespace realgym {

// Base of every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid parameters or unresolved names in a configuration.
struct ConfigError : Error {
  using Error::Error;
};

// API misuse: wrong action kind, stepping a finished episode, bad ranges.
struct UsageError : Error {
  using Error::Error;
};

// Dataset content problems: empty input, missing slices, invariant violations.
struct DataError : Error {
  using Error::Error;
};

// Malformed delimited text. Carries the 1-based line number of the bad row.
struct ParseError : DataError {
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// File does not follow the declared column schema or spacing rule.
struct SchemaError : DataError {
  using DataError::DataError;
};

}  // namespace realgym
