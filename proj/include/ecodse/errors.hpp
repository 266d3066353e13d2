#pragma once

#include <stdexcept>
#include <string>

namespace ecodse {

/// Base for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad invocation: unknown flags, missing required options, unknown config keys.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input text could not be parsed at all (bad JSON, bad CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates the data contract (missing node, wrong dimension).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A remote service (LLM endpoint) failed or is unreachable.
class ExternalServiceError : public Error {
 public:
  using Error::Error;
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace ecodse
