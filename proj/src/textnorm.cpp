#include "authnorm/textnorm.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "authnorm/error.hpp"

namespace authnorm {

namespace alphabet {

int id_of(char c) {
  if (c >= 'a' && c <= 'z') return 4 + (c - 'a');
  if (c >= '0' && c <= '9') return 30 + (c - '0');
  switch (c) {
    case ' ': return 40;
    case '.': return 41;
    case '-': return 42;
    case '\'': return 43;
    case ',': return 44;
    default: return kUnk;
  }
}

char char_of(int id) {
  if (id >= 4 && id < 30) return static_cast<char>('a' + (id - 4));
  if (id >= 30 && id < 40) return static_cast<char>('0' + (id - 30));
  switch (id) {
    case 40: return ' ';
    case 41: return '.';
    case 42: return '-';
    case 43: return '\'';
    case 44: return ',';
    case kUnk: return kUnkChar;
    default: return '\0';
  }
}

bool is_control(int id) { return id == kPad || id == kSos || id == kEos; }

}  // namespace alphabet

namespace {

// Latin-1 supplement, U+00C0..U+00FF.
constexpr std::array<const char*, 64> kLatin1 = {
    "a", "a", "a", "a", "a", "a", "ae", "c",  // C0-C7
    "e", "e", "e", "e", "i", "i", "i",  "i",  // C8-CF
    "d", "n", "o", "o", "o", "o", "o",  "?",  // D0-D7 (D7 multiplication sign)
    "o", "u", "u", "u", "u", "y", "th", "ss", // D8-DF
    "a", "a", "a", "a", "a", "a", "ae", "c",  // E0-E7
    "e", "e", "e", "e", "i", "i", "i",  "i",  // E8-EF
    "d", "n", "o", "o", "o", "o", "o",  "?",  // F0-F7 (F7 division sign)
    "o", "u", "u", "u", "u", "y", "th", "y",  // F8-FF
};

// Latin Extended-A, U+0100..U+017F, pairs of upper/lower case.
constexpr std::array<const char*, 128> kLatinExtA = {
    "a",  "a",  "a",  "a",  "a",  "a",  "c",  "c",   // 100-107
    "c",  "c",  "c",  "c",  "c",  "c",  "d",  "d",   // 108-10F
    "d",  "d",  "e",  "e",  "e",  "e",  "e",  "e",   // 110-117
    "e",  "e",  "e",  "e",  "g",  "g",  "g",  "g",   // 118-11F
    "g",  "g",  "g",  "g",  "h",  "h",  "h",  "h",   // 120-127
    "i",  "i",  "i",  "i",  "i",  "i",  "i",  "i",   // 128-12F
    "i",  "i",  "ij", "ij", "j",  "j",  "k",  "k",   // 130-137
    "k",  "l",  "l",  "l",  "l",  "l",  "l",  "l",   // 138-13F
    "l",  "l",  "l",  "n",  "n",  "n",  "n",  "n",   // 140-147
    "n",  "n",  "n",  "n",  "o",  "o",  "o",  "o",   // 148-14F
    "o",  "o",  "oe", "oe", "r",  "r",  "r",  "r",   // 150-157
    "r",  "r",  "s",  "s",  "s",  "s",  "s",  "s",   // 158-15F
    "s",  "s",  "t",  "t",  "t",  "t",  "t",  "t",   // 160-167
    "u",  "u",  "u",  "u",  "u",  "u",  "u",  "u",   // 168-16F
    "u",  "u",  "u",  "u",  "w",  "w",  "y",  "y",   // 170-177
    "y",  "z",  "z",  "z",  "z",  "z",  "z",  "s",   // 178-17F
};

// Decodes one code point starting at s[i]; advances i. Invalid sequences
// yield the lead byte as a latin-1 code point.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto byte = [&](std::size_t k) {
    return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F);
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2 && cont(1)) {
    const char32_t cp = ((b0 & 0x1F) << 6) | byte(1);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    const char32_t cp = ((b0 & 0x0F) << 12) | (byte(1) << 6) | byte(2);
    if (cp >= 0x800) {
      i += 3;
      return cp;
    }
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    const char32_t cp =
        ((b0 & 0x07) << 18) | (byte(1) << 12) | (byte(2) << 6) | byte(3);
    if (cp >= 0x10000 && cp <= 0x10FFFF) {
      i += 4;
      return cp;
    }
  }
  ++i;
  return b0;
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' ||
         cp == '\f' || cp == 0xA0 || cp == 0x2007 || cp == 0x202F ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x3000;
}

// Appends the ASCII rendering of one code point; returns false for spaces.
void fold(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    const char c = static_cast<char>(std::tolower(static_cast<int>(cp)));
    out.push_back(alphabet::id_of(c) == alphabet::kUnk ? alphabet::kUnkChar : c);
    return;
  }
  if (cp >= 0xC0 && cp <= 0xFF) {
    out += kLatin1[cp - 0xC0];
    return;
  }
  if (cp >= 0x100 && cp <= 0x17F) {
    out += kLatinExtA[cp - 0x100];
    return;
  }
  switch (cp) {
    case 0x2018: case 0x2019: case 0x201B: case 0x02BC: case 0x00B4:
      out.push_back('\'');
      return;
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014:
      out.push_back('-');
      return;
    case 0x0192: out.push_back('f'); return;
    case 0x0218: case 0x0219: out.push_back('s'); return;
    case 0x021A: case 0x021B: out.push_back('t'); return;
    default: out.push_back(alphabet::kUnkChar); return;
  }
}

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

}  // namespace

NormalizedName normalize(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < name.size()) {
    const char32_t cp = next_code_point(name, i);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    fold(cp, out);
  }
  return NormalizedName{std::move(out), std::string(name)};
}

std::string normalized(std::string_view name) { return normalize(name).text; }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    std::string_view tok = text.substr(i, j - i);
    while (!tok.empty() && !is_alnum(tok.front())) tok.remove_prefix(1);
    while (!tok.empty() && !is_alnum(tok.back())) tok.remove_suffix(1);
    if (!tok.empty()) tokens.emplace_back(tok);
    i = j;
  }
  return tokens;
}

CharSequence encode(std::string_view text) {
  CharSequence seq;
  seq.length = std::min(text.size(), kSequenceLength);
  for (std::size_t t = 0; t < seq.length; ++t) seq.ids[t] = alphabet::id_of(text[t]);
  return seq;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

namespace {

std::map<std::string, int> gram_counts(std::string_view s, int n) {
  // '\x01' never occurs in normalized text.
  std::string padded(static_cast<std::size_t>(n - 1), '\x01');
  padded += s;
  padded.append(static_cast<std::size_t>(n - 1), '\x01');
  std::map<std::string, int> counts;
  if (padded.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= padded.size(); ++i) {
    ++counts[padded.substr(i, static_cast<std::size_t>(n))];
  }
  return counts;
}

}  // namespace

double ngram_distance(std::string_view a, std::string_view b, int n) {
  if (n < 1) throw ValidationError("ngram_distance: n must be >= 1");
  const auto ga = gram_counts(a, n);
  const auto gb = gram_counts(b, n);
  int total_a = 0, total_b = 0, shared = 0;
  for (const auto& [g, c] : ga) {
    total_a += c;
    if (const auto it = gb.find(g); it != gb.end()) shared += std::min(c, it->second);
  }
  for (const auto& [g, c] : gb) total_b += c;
  const int denom = std::max(total_a, total_b);
  if (denom == 0) return 0.0;
  return 1.0 - static_cast<double>(shared) / denom;
}

bool fuzzy_token_match(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  for (const auto& x : ta) {
    for (const auto& y : tb) {
      if (levenshtein(x, y) < 2) return true;
    }
  }
  return false;
}

}  // namespace authnorm
