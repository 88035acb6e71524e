#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace authnorm {

/// Fixed character alphabet shared by both neural models.
///
/// Ids: PAD=0, UNK=1, SOS=2, EOS=3, then 'a'-'z', '0'-'9', space, period,
/// hyphen, apostrophe, comma. In normalized text the UNK symbol is written
/// as '?'.
namespace alphabet {
inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kSos = 2;
inline constexpr int kEos = 3;
inline constexpr int kSize = 45;
inline constexpr char kUnkChar = '?';

/// Id for a character of normalized text; anything unexpected maps to UNK.
int id_of(char c);
/// Printable character for an id; control ids (PAD/SOS/EOS) return '\0'.
char char_of(int id);
bool is_control(int id);
}  // namespace alphabet

/// Lowercase ASCII over the model alphabet, whitespace-collapsed.
struct NormalizedName {
  std::string text;
  std::string original;
};

inline constexpr std::size_t kSequenceLength = 32;

/// Fixed-length id sequence; PAD only as a suffix.
struct CharSequence {
  std::array<int, kSequenceLength> ids{};
  std::size_t length = 0;  // number of non-PAD ids

  bool operator==(const CharSequence&) const = default;
};

/// Case-folds, strips diacritics (latin-1 and Latin Extended-A via a fixed
/// table), replaces remaining out-of-alphabet characters with '?', and
/// collapses whitespace. Invalid UTF-8 bytes are read as latin-1.
NormalizedName normalize(std::string_view name);

/// Shorthand for normalize(name).text.
std::string normalized(std::string_view name);

/// Whitespace tokens with leading/trailing punctuation removed; tokens with
/// no letters or digits are dropped.
std::vector<std::string> tokenize(std::string_view normalized_text);

CharSequence encode(std::string_view normalized_text);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// Boundary-padded character n-gram distance:
/// 1 - |grams(a) ∩ grams(b)| / max(|grams(a)|, |grams(b)|) over multisets.
/// Throws ValidationError for n < 1.
double ngram_distance(std::string_view a, std::string_view b, int n);

/// True iff some token of a is within Levenshtein distance 1 of some token
/// of b.
bool fuzzy_token_match(std::string_view a, std::string_view b);

}  // namespace authnorm
