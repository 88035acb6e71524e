#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "authnorm/error.hpp"
#include "authnorm/records.hpp"

namespace authnorm {

/// Wrong number of digits or stray characters.
class IsbnFormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Well-formed but the check digit does not verify.
class IsbnChecksumError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class Isbn {
 public:
  /// Accepts ISBN-10 (mod-11, 'X' allowed as check digit) or ISBN-13
  /// (mod-10 weighted), with hyphens and spaces ignored. ISBN-10s are
  /// converted to the 978-prefixed ISBN-13.
  static Isbn parse(std::string_view text);

  const std::string& canonical13() const { return canonical13_; }
  const std::string& original() const { return original_; }

  /// 10-digit form; absent for 979-prefixed numbers.
  std::optional<std::string> to_isbn10() const;

  bool operator==(const Isbn& o) const { return canonical13_ == o.canonical13_; }

 private:
  Isbn(std::string canonical13, std::string original)
      : canonical13_(std::move(canonical13)), original_(std::move(original)) {}

  std::string canonical13_;
  std::string original_;
};

/// Check character for the first 9 digits of an ISBN-10 ('0'-'9' or 'X').
char isbn10_check_char(std::string_view nine_digits);
/// Check digit for the first 12 digits of an ISBN-13.
char isbn13_check_char(std::string_view twelve_digits);

/// Parses the record's ISBN. Malformed values yield nullopt and, when note
/// is non-null, a human-readable reason.
std::optional<Isbn> record_isbn(const BookRecord& record, std::string* note = nullptr);

/// True iff the record carries an ISBN that parses.
bool is_present(const BookRecord& record, std::string* note = nullptr);

}  // namespace authnorm
