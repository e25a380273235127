#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace crawlsim {

// Base class for everything the library throws on bad input or bad state.
// The CLI maps these to exit code 2 (user/config error); any other exception
// is treated as an internal error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::uint64_t line, const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  std::uint64_t line() const noexcept { return line_; }

 private:
  std::uint64_t line_;
};

// Node id outside the graph.
class RangeError : public Error {
  using Error::Error;
};

// Invalid run parameters (duplicate seeds, bad budgets, missing keys, ...).
class ConfigError : public Error {
  using Error::Error;
};

// Duplicate ids and similar violations during file ingestion.
class IngestError : public Error {
  using Error::Error;
};

// Fetch of a node the document store has no content for.
class ContentMissingError : public Error {
  using Error::Error;
};

// Score table queried for an id it does not cover.
class LookupError : public Error {
  using Error::Error;
};

// Correlation undefined: length mismatch, fewer than two points, or zero
// rank variance.
class UndefinedCorrelationError : public Error {
  using Error::Error;
};

class IoError : public Error {
  using Error::Error;
};

}  // namespace crawlsim
