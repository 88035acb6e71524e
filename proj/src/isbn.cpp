#include "authnorm/isbn.hpp"

#include <algorithm>
#include <cctype>

namespace authnorm {

namespace {

int digit(char c) { return c - '0'; }

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

char isbn10_check_char(std::string_view nine) {
  int sum = 0;
  for (int i = 0; i < 9; ++i) sum += (10 - i) * digit(nine[i]);
  const int check = (11 - sum % 11) % 11;
  return check == 10 ? 'X' : static_cast<char>('0' + check);
}

char isbn13_check_char(std::string_view twelve) {
  int sum = 0;
  for (int i = 0; i < 12; ++i) sum += (i % 2 == 0 ? 1 : 3) * digit(twelve[i]);
  return static_cast<char>('0' + (10 - sum % 10) % 10);
}

Isbn Isbn::parse(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (c == '-' || c == ' ') continue;
    compact.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  const std::string original(text);
  if (compact.size() == 10) {
    if (!all_digits(std::string_view(compact).substr(0, 9)) ||
        !(std::isdigit(static_cast<unsigned char>(compact[9])) || compact[9] == 'X')) {
      throw IsbnFormatError("ISBN-10 must be 9 digits plus a digit or X: " + original);
    }
    if (isbn10_check_char(compact) != compact[9]) {
      throw IsbnChecksumError("ISBN-10 check digit mismatch: " + original);
    }
    std::string thirteen = "978" + compact.substr(0, 9);
    thirteen.push_back(isbn13_check_char(thirteen));
    return Isbn(std::move(thirteen), original);
  }
  if (compact.size() == 13) {
    if (!all_digits(compact)) throw IsbnFormatError("ISBN-13 must be 13 digits: " + original);
    if (compact.compare(0, 3, "978") != 0 && compact.compare(0, 3, "979") != 0) {
      throw IsbnFormatError("ISBN-13 must start with 978 or 979: " + original);
    }
    if (isbn13_check_char(compact) != compact[12]) {
      throw IsbnChecksumError("ISBN-13 check digit mismatch: " + original);
    }
    return Isbn(std::move(compact), original);
  }
  throw IsbnFormatError("ISBN must have 10 or 13 digits: " + original);
}

std::optional<std::string> Isbn::to_isbn10() const {
  if (canonical13_.compare(0, 3, "978") != 0) return std::nullopt;
  std::string ten = canonical13_.substr(3, 9);
  ten.push_back(isbn10_check_char(ten));
  return ten;
}

std::optional<Isbn> record_isbn(const BookRecord& record, std::string* note) {
  if (!record.isbn || record.isbn->empty()) return std::nullopt;
  try {
    return Isbn::parse(*record.isbn);
  } catch (const ValidationError& e) {
    if (note) *note = e.what();
    return std::nullopt;
  }
}

bool is_present(const BookRecord& record, std::string* note) {
  return record_isbn(record, note).has_value();
}

}  // namespace authnorm
