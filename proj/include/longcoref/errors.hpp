#pragma once

#include <stdexcept>
#include <string>

namespace longcoref {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes (JSON schema, binary layout, TSV rows).
class ParseError : public Error {
 public:
  ParseError(const std::string& path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Input parsed but violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between a model and its inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace longcoref
