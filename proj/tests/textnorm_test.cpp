#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "authnorm/error.hpp"
#include "authnorm/rng.hpp"
#include "authnorm/textnorm.hpp"

namespace authnorm {
namespace {

// Independent edit-distance oracle: plain recursion with memo.
std::size_t edit_oracle(const std::string& a, const std::string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min({best, go(i + 1, j) + 1, go(i, j + 1) + 1});
    return memo[key] = best;
  };
  return go(0, 0);
}

// Multiset gram oracle written out by hand for the boundary-padded form.
std::map<std::string, int> grams(const std::string& s, int n) {
  const std::string padded = std::string(n - 1, '#') + s + std::string(n - 1, '$');
  std::map<std::string, int> out;
  for (std::size_t i = 0; i + n <= padded.size(); ++i) ++out[padded.substr(i, n)];
  return out;
}

double ngram_oracle(const std::string& a, const std::string& b, int n) {
  const auto ga = grams(a, n), gb = grams(b, n);
  int ca = 0, cb = 0, shared = 0;
  for (const auto& [g, c] : ga) {
    ca += c;
    if (auto it = gb.find(g); it != gb.end()) shared += std::min(c, it->second);
  }
  for (const auto& [g, c] : gb) cb += c;
  const int denom = std::max(ca, cb);
  return denom == 0 ? 0.0 : 1.0 - static_cast<double>(shared) / denom;
}

TEST(Normalize, FoldsCaseAndCollapsesWhitespace) {
  EXPECT_EQ(normalized("F. Scott   FITZGERALD "), "f. scott fitzgerald");
  EXPECT_EQ(normalize("F. Scott FITZGERALD").original, "F. Scott FITZGERALD");
}

TEST(Normalize, StripsDiacritics) {
  EXPECT_EQ(normalized("Émile Zola"), "emile zola");
  EXPECT_EQ(normalized("Søren Kierkegaard"), "soren kierkegaard");
  EXPECT_EQ(normalized("Antonín Dvořák"), "antonin dvorak");
}

TEST(Normalize, EmptyAndUnknown) {
  EXPECT_EQ(normalized(""), "");
  EXPECT_EQ(normalized("   "), "");
  EXPECT_EQ(normalized("a&b"), "a?b");
}

TEST(Normalize, OutputStaysInAlphabetProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>(rng.below(256)));
    const std::string n = normalized(s);
    for (char c : n) EXPECT_TRUE(c == alphabet::kUnkChar || alphabet::id_of(c) != alphabet::kUnk) << s;
    EXPECT_TRUE(n.empty() || (n.front() != ' ' && n.back() != ' '));
    EXPECT_EQ(n.find("  "), std::string::npos);
    EXPECT_EQ(normalized(n), n) << "normalization must be idempotent";
  }
}

TEST(Tokenize, DropsPunctuation) {
  EXPECT_EQ(tokenize("f. scott fitzgerald"), (std::vector<std::string>{"f", "scott", "fitzgerald"}));
  EXPECT_EQ(tokenize("fitzgerald, f. scott"), (std::vector<std::string>{"fitzgerald", "f", "scott"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" . , ").empty());
}

TEST(Encode, PadsAndTruncates) {
  const auto ab = encode("ab");
  EXPECT_EQ(ab.length, 2u);
  EXPECT_EQ(ab.ids[0], alphabet::id_of('a'));
  EXPECT_EQ(ab.ids[1], alphabet::id_of('b'));
  for (std::size_t i = 2; i < kSequenceLength; ++i) EXPECT_EQ(ab.ids[i], alphabet::kPad);

  const std::string long_name(40, 'x');
  EXPECT_EQ(encode(long_name).length, kSequenceLength);

  const auto empty = encode("");
  EXPECT_EQ(empty.length, 0u);
  for (int id : empty.ids) EXPECT_EQ(id, alphabet::kPad);
}

TEST(Alphabet, LayoutIsFixed) {
  EXPECT_EQ(alphabet::id_of('a'), 4);
  EXPECT_EQ(alphabet::id_of('z'), 29);
  EXPECT_EQ(alphabet::id_of('0'), 30);
  EXPECT_EQ(alphabet::id_of(' '), 40);
  EXPECT_EQ(alphabet::id_of(','), 44);
  EXPECT_EQ(alphabet::id_of('?'), alphabet::kUnk);
  for (int id = 4; id < alphabet::kSize; ++id) EXPECT_EQ(alphabet::id_of(alphabet::char_of(id)), id);
  EXPECT_TRUE(alphabet::is_control(alphabet::kPad));
  EXPECT_TRUE(alphabet::is_control(alphabet::kEos));
}

TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein("fitzgerald", "fitgerald"), edit_oracle("fitzgerald", "fitgerald"));
  EXPECT_EQ(levenshtein("fitzgerald", "fitgerald"), 1u);
  EXPECT_EQ(levenshtein("abc", "abc"), 0u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
}

TEST(Levenshtein, MatchesOracleAndIsAMetric) {
  Rng rng(5);
  auto word = [&] {
    std::string s;
    const std::size_t len = rng.below(8);
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.below(3)));
    return s;
  };
  for (int t = 0; t < 300; ++t) {
    const auto a = word(), b = word(), c = word();
    EXPECT_EQ(levenshtein(a, b), edit_oracle(a, b));
    EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
    EXPECT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
  }
}

TEST(NgramDistance, Examples) {
  EXPECT_EQ(ngram_distance("abc", "abc", 3), 0.0);
  EXPECT_EQ(ngram_distance("ab", "cd", 2), 1.0);
  const double d = ngram_distance("fitzgerald", "fitgerald", 3);
  EXPECT_GT(d, 0.0);
  EXPECT_LT(d, 1.0);
  EXPECT_DOUBLE_EQ(d, ngram_oracle("fitzgerald", "fitgerald", 3));
  EXPECT_THROW(ngram_distance("a", "b", 0), ValidationError);
}

TEST(NgramDistance, MatchesOracleProperty) {
  Rng rng(9);
  auto word = [&] {
    std::string s;
    const std::size_t len = rng.below(10);
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.below(4)));
    return s;
  };
  for (int t = 0; t < 300; ++t) {
    const auto a = word(), b = word();
    const int n = 1 + static_cast<int>(rng.below(3));
    const double d = ngram_distance(a, b, n);
    EXPECT_DOUBLE_EQ(d, ngram_oracle(a, b, n));
    EXPECT_DOUBLE_EQ(d, ngram_distance(b, a, n));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(FuzzyTokenMatch, Examples) {
  EXPECT_TRUE(fuzzy_token_match("f. scott fitzgerald", "francis scott fitzgerald"));
  EXPECT_TRUE(fuzzy_token_match("f. scott fitgerald", "fitzgerald"));
  EXPECT_FALSE(fuzzy_token_match("alpha", "omega"));
  EXPECT_FALSE(fuzzy_token_match("", "omega"));
}

TEST(FuzzyTokenMatch, AgreesWithTokenOracle) {
  Rng rng(21);
  auto name = [&] {
    std::string s;
    const std::size_t tokens = 1 + rng.below(3);
    for (std::size_t t = 0; t < tokens; ++t) {
      if (t) s.push_back(' ');
      const std::size_t len = 1 + rng.below(4);
      for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.below(3)));
    }
    return s;
  };
  for (int t = 0; t < 300; ++t) {
    const auto a = name(), b = name();
    bool expected = false;
    for (const auto& x : tokenize(a)) {
      for (const auto& y : tokenize(b)) expected = expected || edit_oracle(x, y) <= 1;
    }
    EXPECT_EQ(fuzzy_token_match(a, b), expected) << a << " | " << b;
    EXPECT_EQ(fuzzy_token_match(a, b), fuzzy_token_match(b, a));
  }
}

}  // namespace
}  // namespace authnorm
