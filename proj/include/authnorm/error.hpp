#pragma once

#include <stdexcept>
#include <string>

namespace authnorm {

/// Bad user input: malformed records, invalid parameters, bad ISBNs.
/// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record line is missing a required field or has the wrong type.
class SchemaError : public ValidationError {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": field \"" + field +
                        "\": " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Versioned binary containers (models, index) that do not match.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a NaN or infinite loss.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace authnorm
