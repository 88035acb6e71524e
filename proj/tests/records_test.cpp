#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "authnorm/error.hpp"
#include "authnorm/records.hpp"
#include "test_util.hpp"

namespace authnorm {
namespace {

TEST(Books, EmptyFileGivesNoRecords) {
  test::TempDir dir;
  const auto path = dir.write("empty.jsonl", "");
  EXPECT_TRUE(load_books(path).empty());
}

TEST(Books, LoadsOneRecordWithoutIsbn) {
  test::TempDir dir;
  const auto path = dir.write("b.jsonl", R"({"title":"Gatsby","author_raw":"F. Scott Fitzgerald"})" "\n\n");
  const auto books = load_books(path);
  ASSERT_EQ(books.size(), 1u);
  EXPECT_FALSE(books[0].isbn.has_value());
  EXPECT_EQ(books[0].title, "Gatsby");
  EXPECT_EQ(books[0].author_raw, "F. Scott Fitzgerald");
}

TEST(Books, MissingTitleCitesLineAndField) {
  test::TempDir dir;
  const auto path = dir.write("b.jsonl", R"({"author_raw":"X"})" "\n");
  try {
    load_books(path);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.field(), "title");
  }
}

TEST(Books, BadJsonIsASchemaError) {
  test::TempDir dir;
  const auto path = dir.write("b.jsonl", "{\"title\":\"ok\"}\n{not json\n");
  try {
    load_books(path);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Books, MissingFileIsAnIoError) {
  EXPECT_THROW(load_books("/nonexistent/books.jsonl"), IoError);
}

TEST(Books, RoundTrip) {
  test::TempDir dir;
  const std::vector<BookRecord> books{{"9780306406157", "A", "Émile Zola"},
                                      {std::nullopt, "B", "Unknown"},
                                      {"0-306-40615-2", "C \"quoted\"", ""}};
  write_books(dir.path() / "b.jsonl", books);
  EXPECT_EQ(load_books(dir.path() / "b.jsonl"), books);
}

TEST(Books, UnknownAuthorPlaceholder) {
  EXPECT_EQ(effective_author({std::nullopt, "t", "Unknown"}), "");
  EXPECT_EQ(effective_author({std::nullopt, "t", "Zola"}), "Zola");
}

TEST(Entities, RoundTripKeepsVariantsAndProvenance) {
  test::TempDir dir;
  NameEntity e("f. scott fitzgerald", Provenance::kNameVariantList);
  e.add({"fitzgerald, f. scott", Provenance::kIsbnMatch, "", ""});
  e.add({"f. s. fitzgerald", Provenance::kFuzzyMatch, "", ""});
  e.add({"francis scott fitzgerald", Provenance::kIsbnMatch, "", ""});
  e.add({"f. scott fitgerald", Provenance::kSynthetic, "single-typo", "f. scott fitzgerald"});
  ASSERT_EQ(e.variants().size(), 5u);
  write_entities(dir.path() / "e.jsonl", {e});
  const auto back = load_entities(dir.path() / "e.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], e);
}

TEST(Entities, AddDeduplicates) {
  NameEntity e("zola", Provenance::kIsbnMatch);
  EXPECT_FALSE(e.add({"zola", Provenance::kSynthetic, "", ""}));
  EXPECT_FALSE(e.add({"", Provenance::kSynthetic, "", ""}));
  EXPECT_TRUE(e.add({"e. zola", Provenance::kSynthetic, "", ""}));
  EXPECT_EQ(e.texts(), (std::vector<std::string>{"zola", "e. zola"}));
}

TEST(Entities, CanonicalMustBeAVariant) {
  test::TempDir dir;
  const auto path =
      dir.write("e.jsonl", R"({"canonical":"a","variants":["b"],"provenance":["synthetic"]})" "\n");
  EXPECT_THROW(load_entities(path), SchemaError);
}

TEST(Entities, UnknownProvenanceRejected) {
  test::TempDir dir;
  const auto path =
      dir.write("e.jsonl", R"({"canonical":"a","variants":["a"],"provenance":["guess"]})" "\n");
  EXPECT_THROW(load_entities(path), SchemaError);
}

TEST(Annotated, RoundTrip) {
  test::TempDir dir;
  const std::vector<AnnotatedBook> books{{{"9780306406157", "T", "zola, e."}, "emile zola"}};
  write_annotated(dir.path() / "a.jsonl", books);
  EXPECT_EQ(load_annotated(dir.path() / "a.jsonl"), books);
}

TEST(Writers, UnwritablePathIsAnIoError) {
  EXPECT_THROW(write_books("/nonexistent/dir/b.jsonl", {}), IoError);
}

}  // namespace
}  // namespace authnorm
