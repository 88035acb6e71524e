#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "authnorm/dataset.hpp"
#include "authnorm/error.hpp"
#include "authnorm/isbn.hpp"
#include "authnorm/textnorm.hpp"
#include "test_util.hpp"

namespace authnorm {
namespace {

std::string apply(const char* rule, const char* name, std::uint64_t seed = 1) {
  Rng rng(seed);
  return apply_rule(VariantRule::parse(rule), name, rng).value_or("<none>");
}

TEST(Rules, ParseAndId) {
  for (const auto& r : all_rules()) EXPECT_EQ(VariantRule::parse(r.id()), r);
  EXPECT_EQ(VariantRule::parse("single-typo:transpose").typo, TypoKind::kTranspose);
  EXPECT_EQ(VariantRule::parse("single-typo:insert").id(), "single-typo:insert");
  EXPECT_THROW(VariantRule::parse("shout"), ValidationError);
  EXPECT_THROW(VariantRule::parse("name-inversion:insert"), ValidationError);
}

TEST(Rules, Abbreviation) {
  EXPECT_EQ(apply("initial-abbreviation", "francis scott fitzgerald"), "f. scott fitzgerald");
  EXPECT_EQ(apply("initial-abbreviation", "f. scott fitzgerald"), "<none>");
  EXPECT_EQ(apply("initial-abbreviation", "zola, emile"), "<none>");
  EXPECT_EQ(apply("initial-abbreviation", "homer"), "<none>");
}

TEST(Rules, Inversion) {
  EXPECT_EQ(apply("name-inversion", "emile zola"), "zola, emile");
  EXPECT_EQ(apply("name-inversion", "f. scott fitzgerald"), "fitzgerald, f. scott");
  EXPECT_EQ(apply("name-inversion", "zola, emile"), "<none>");
  EXPECT_EQ(apply("name-inversion", "homer"), "<none>");
}

TEST(Rules, CaseAndDiacriticsAreNoOpsOnNormalizedText) {
  EXPECT_EQ(apply("case-change", "emile zola"), "<none>");
  EXPECT_EQ(apply("diacritic-strip", "emile zola"), "<none>");
  EXPECT_EQ(apply("diacritic-strip", "Émile Zola"), "emile zola");
}

TEST(Rules, SingleTypoIsOneEditAway) {
  for (const char* kind : {"single-typo:insert", "single-typo:delete",
                           "single-typo:substitute"}) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto out = apply(kind, "victor hugo", seed);
      ASSERT_NE(out, "<none>");
      EXPECT_EQ(levenshtein(out, "victor hugo"), 1u) << kind << " " << out;
    }
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto out = apply("single-typo:transpose", "victor hugo", seed);
    ASSERT_EQ(out.size(), 11u);
    std::string a = out, b = "victor hugo";
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_LE(levenshtein(out, "victor hugo"), 2u);
  }
  EXPECT_EQ(apply("single-typo:transpose", "aa"), "<none>");
  // Unrestricted typos are one edit or one adjacent swap.
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto out = apply("single-typo", "victor hugo", seed);
    bool swap = false;
    for (std::size_t i = 0; i + 1 < out.size() && out.size() == 11; ++i) {
      std::string back = out;
      std::swap(back[i], back[i + 1]);
      swap = swap || back == "victor hugo";
    }
    EXPECT_TRUE(levenshtein(out, "victor hugo") == 1 || swap) << out;
  }
}

TEST(Election, Examples) {
  EXPECT_EQ(elect_canonical({{"a", "f. s. fitzgerald"}, {"b", "f. scott fitzgerald"}},
                            {"f. scott fitzgerald"}),
            "f. scott fitzgerald");
  EXPECT_EQ(elect_canonical({{"a", "x"}, {"b", "x"}, {"c", "x"}, {"d", "y"}}, {}), "x");
  EXPECT_EQ(elect_canonical({{"a", "bb"}, {"b", "bb"}, {"c", "aa"}, {"d", "aa"}}, {}), "aa");
  EXPECT_EQ(elect_canonical({{"a", "bbb"}, {"b", "aa"}}, {}), "bbb");
  EXPECT_THROW(elect_canonical({}, {}), ValidationError);
}

TEST(Election, TwoWikiMatchesFallBackToVotes) {
  EXPECT_EQ(elect_canonical({{"a", "x"}, {"b", "y"}, {"c", "y"}}, {"x", "y"}), "y");
}

AggregateAnswer found(std::vector<std::pair<SourceId, std::string>> names) {
  AggregateAnswer a;
  for (auto id : all_sources()) a[source_index(id)].source = id;
  for (const auto& [id, n] : names) {
    a[source_index(id)].status = AnswerStatus::kFound;
    a[source_index(id)].author_names = {n};
  }
  return a;
}

TEST(EntitiesFromMatches, SingletonMergeAndVacuous) {
  const std::vector<BookRecord> books{{"9780306406157", "t1", "Emile Zola"},
                                      {"0-306-40615-2", "t1 again", "E. Zola"},
                                      {"9780140449129", "t2", "Nobody"},
                                      {std::nullopt, "t3", "Zola"}};
  MatchTable table;
  table["9780306406157"] = found({{SourceId::kOpenLibrary, "emile zola"}, {SourceId::kOclc, "zola, emile"}});
  table["9780140449129"] = found({});
  const auto entities = build_entities_from_matches(books, table, {});
  ASSERT_EQ(entities.size(), 1u);
  EXPECT_EQ(entities[0].canonical(), "zola, emile");  // longer on the 1-1 tie
  EXPECT_TRUE(entities[0].contains("emile zola"));
  EXPECT_TRUE(entities[0].contains("e. zola"));
  for (const auto& v : entities[0].variants()) EXPECT_EQ(v.provenance, Provenance::kIsbnMatch);
}

TEST(EntitiesFromMatches, IdenticalEverywhereGivesSingleton) {
  const std::vector<BookRecord> books{{"9780306406157", "t", "Victor Hugo"}};
  MatchTable table;
  table["9780306406157"] = found({{SourceId::kGoodreads, "victor hugo"}, {SourceId::kBnf, "victor hugo"}});
  const auto entities = build_entities_from_matches(books, table, {});
  ASSERT_EQ(entities.size(), 1u);
  EXPECT_EQ(entities[0].variants().size(), 1u);
}

TEST(EntitiesFuzzy, Examples) {
  std::vector<std::string> log;
  const std::vector<BookRecord> books{{std::nullopt, "a", "F. Scott Fitgerald"},
                                      {std::nullopt, "b", "Qwxz Vbnm"},
                                      {std::nullopt, "c", "Anne Smith"}};
  const auto entities = build_entities_fuzzy(
      books, {"Francis Scott Fitzgerald", "Anne Brown", "Anne Green"}, &log);
  ASSERT_EQ(entities.size(), 1u);
  EXPECT_EQ(entities[0].canonical(), "francis scott fitzgerald");
  EXPECT_TRUE(entities[0].contains("f. scott fitgerald"));
  ASSERT_EQ(log.size(), 1u);
  EXPECT_NE(log[0].find("anne smith"), std::string::npos);
}

TEST(EntitiesFuzzy, ExactTokenCountBreaksTies) {
  const std::vector<BookRecord> books{{std::nullopt, "a", "Anne Brown"}};
  const auto entities = build_entities_fuzzy(books, {"Anne Brown", "Anne Browne"});
  ASSERT_EQ(entities.size(), 1u);
  EXPECT_EQ(entities[0].canonical(), "anne brown");
}

TEST(Merge, OrderIndependentUnion) {
  NameEntity a("x", Provenance::kIsbnMatch);
  a.add({"x1", Provenance::kFuzzyMatch, "", ""});
  NameEntity b("x", Provenance::kNameVariantList);
  b.add({"x2", Provenance::kIsbnMatch, "", ""});
  b.add({"x1", Provenance::kIsbnMatch, "", ""});
  NameEntity c("w", Provenance::kSynthetic);
  const auto m1 = merge_entities({a, b, c});
  const auto m2 = merge_entities({c, b, a});
  EXPECT_EQ(m1, m2);
  ASSERT_EQ(m1.size(), 2u);
  EXPECT_EQ(m1[0].canonical(), "w");
  EXPECT_EQ(m1[1].texts(), (std::vector<std::string>{"x", "x1", "x2"}));
  EXPECT_EQ(m1[1].variants()[0].provenance, Provenance::kIsbnMatch);
  EXPECT_EQ(m1[1].variants()[1].provenance, Provenance::kIsbnMatch);
}

TEST(Augment, AddsRuleVariantsWithOrigin) {
  NameEntity e("francis scott fitzgerald", Provenance::kNameVariantList);
  AugmentReport report;
  const auto out = augment({e}, {VariantRule::parse("initial-abbreviation"),
                                 VariantRule::parse("name-inversion")},
                           1, &report);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].contains("f. scott fitzgerald"));
  EXPECT_TRUE(out[0].contains("fitzgerald, francis scott"));
  for (const auto& v : out[0].variants()) {
    if (v.text == e.canonical()) continue;
    EXPECT_EQ(v.provenance, Provenance::kSynthetic);
    EXPECT_EQ(v.derived_from, "francis scott fitzgerald");
    EXPECT_FALSE(v.rule.empty());
  }
  EXPECT_EQ(report.added["initial-abbreviation"], 1u);
  const auto census = variant_census(out);
  EXPECT_EQ(census.at("synthetic"), 2u);
  EXPECT_EQ(census.at("synthetic:name-inversion"), 1u);
}

TEST(Augment, DoesNotDependOnEntityOrder) {
  NameEntity a("emile zola", Provenance::kNameVariantList);
  NameEntity b("victor hugo", Provenance::kIsbnMatch);
  b.add({"hugo, victor", Provenance::kIsbnMatch, "", ""});
  const auto x = augment({a, b}, all_rules(), 3);
  const auto y = augment({b, a}, all_rules(), 3);
  EXPECT_EQ(x[0], y[1]);
  EXPECT_EQ(x[1], y[0]);
  // Synthetic variants are not expanded again.
  EXPECT_EQ(augment(x, all_rules(), 3), x);
}

TEST(Split, SizesDeterminismAndDisjointness) {
  std::vector<NameEntity> entities;
  for (int i = 0; i < 10; ++i) entities.emplace_back("n" + std::to_string(i), Provenance::kSynthetic);
  const auto [a, b] = split(entities, 0.5, 4);
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(b.size(), 5u);
  const auto [c, d] = split(entities, 0.5, 4);
  EXPECT_EQ(a, c);
  EXPECT_EQ(b, d);
  std::set<std::string> names;
  for (const auto& e : a) names.insert(e.canonical());
  for (const auto& e : b) EXPECT_FALSE(names.count(e.canonical()));
  EXPECT_THROW(split(entities, 0.0, 1), ValidationError);
  EXPECT_THROW(split(entities, 1.0, 1), ValidationError);
}

TEST(CorrectionPairs, VariantToCanonical) {
  NameEntity e("emile zola", Provenance::kNameVariantList);
  e.add({"zola, emile", Provenance::kIsbnMatch, "", ""});
  const auto pairs = correction_pairs({e});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (std::pair<std::string, std::string>{"zola, emile", "emile zola"}));
  EXPECT_EQ(correction_pairs({e}, true).size(), 2u);
}

TEST(ReferenceNames, NormalizedAndBlankLinesSkipped) {
  test::TempDir dir;
  const auto path = dir.write("ref.txt", "Émile Zola\n\n  Victor HUGO \n");
  EXPECT_EQ(load_reference_names(path), (std::vector<std::string>{"emile zola", "victor hugo"}));
}

}  // namespace
}  // namespace authnorm
