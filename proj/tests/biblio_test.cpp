#include <gtest/gtest.h>

#include <atomic>
#include <chrono>

#include "authnorm/biblio.hpp"
#include "authnorm/config.hpp"
#include "authnorm/isbn.hpp"
#include "test_util.hpp"

namespace authnorm {
namespace {

const Isbn kIsbn = Isbn::parse("9780306406157");

TEST(Sources, FrozenOrder) {
  const std::vector<std::string> expected{"openlibrary", "isbndb", "goodreads", "googlebooks",
                                          "oclc", "bnf", "sudoc", "babelio"};
  ASSERT_EQ(all_sources().size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(source_index(all_sources()[i]), i);
    EXPECT_EQ(slug(all_sources()[i]), expected[i]);
    EXPECT_EQ(source_from_slug(expected[i]), all_sources()[i]);
  }
  EXPECT_THROW(source_from_slug("amazon"), ValidationError);
}

TEST(FixtureSource, FoundNotFoundUnavailable) {
  std::map<std::string, FixtureSource::Entry> table;
  table["9780306406157"] = {{"Émile Zola", "emile zola"}, false};
  table["9780140449129"] = {{}, true};
  const FixtureSource src(SourceId::kGoodreads, table);
  const auto hit = src.lookup(kIsbn);
  EXPECT_EQ(hit.status, AnswerStatus::kFound);
  EXPECT_EQ(hit.author_names, (std::vector<std::string>{"emile zola"}));
  EXPECT_EQ(src.lookup(Isbn::parse("9780000000002")).status, AnswerStatus::kNotFound);
  const auto down = src.lookup(Isbn::parse("9780140449129"));
  EXPECT_EQ(down.status, AnswerStatus::kUnavailable);
  EXPECT_FALSE(down.diagnostic.empty());
}

TEST(FixtureSource, SaveLoadRoundTrip) {
  test::TempDir dir;
  std::map<std::string, FixtureSource::Entry> table;
  table["9780306406157"] = {{"emile zola"}, false};
  table["9780140449129"] = {{}, true};
  FixtureSource(SourceId::kBnf, table).save(dir.path());
  const auto back = FixtureSource::load(dir.path(), SourceId::kBnf);
  EXPECT_EQ(back.table().size(), 2u);
  EXPECT_EQ(back.lookup(kIsbn).author_names, (std::vector<std::string>{"emile zola"}));
  EXPECT_TRUE(FixtureSource::load(dir.path(), SourceId::kSudoc).table().empty());
}

TEST(FixtureSource, DuplicateKeysRejected) {
  test::TempDir dir;
  dir.write("oclc.jsonl", R"({"isbn13":"9780306406157","authors":["a"]})" "\n"
                          R"({"isbn13":"9780306406157","authors":["b"]})" "\n");
  EXPECT_THROW(FixtureSource::load(dir.path(), SourceId::kOclc), ValidationError);
}

TEST(Aggregate, EmptyFixturesGiveEightNotFound) {
  test::TempDir dir;
  const auto set = SourceSet::fixtures(dir.path());
  const auto answers = aggregate(set, kIsbn);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(answers[i].status, AnswerStatus::kNotFound);
    EXPECT_EQ(answers[i].source, all_sources()[i]);
  }
  EXPECT_FALSE(any_found(answers));
}

TEST(Aggregate, ThreeFound) {
  test::TempDir dir;
  for (const char* s : {"isbndb", "oclc", "babelio"}) {
    dir.write(std::string(s) + ".jsonl", R"({"isbn13":"9780306406157","authors":["X"]})" "\n");
  }
  const auto set = SourceSet::fixtures(dir.path());
  const auto answers = aggregate(set, kIsbn);
  int count = 0;
  for (const auto& a : answers) count += a.status == AnswerStatus::kFound;
  EXPECT_EQ(count, 3);
  EXPECT_EQ(answers[1].status, AnswerStatus::kFound);
  EXPECT_EQ(answers[4].status, AnswerStatus::kFound);
  EXPECT_EQ(answers[7].status, AnswerStatus::kFound);
}

TEST(Aggregate, RecordWithoutValidIsbn) {
  test::TempDir dir;
  dir.write("isbndb.jsonl", R"({"isbn13":"9780306406157","authors":["X"]})" "\n");
  const auto set = SourceSet::fixtures(dir.path());
  EXPECT_FALSE(any_found(aggregate_record(set, {std::nullopt, "t", "a"})));
  EXPECT_FALSE(any_found(aggregate_record(set, {"0306406153", "t", "a"})));
  EXPECT_TRUE(any_found(aggregate_record(set, {"0-306-40615-2", "t", "a"})));
}

TEST(LiveAdapter, RetriesWithBackoffThenSucceeds) {
  LiveSourceConfig cfg;
  cfg.endpoint = "https://example.test/isbn/{isbn}";
  cfg.requests_per_second = 1000;
  cfg.max_retries = 3;
  cfg.backoff_seconds = 0.5;
  std::vector<std::string> urls;
  std::vector<double> sleeps;
  int calls = 0;
  LiveSourceAdapter adapter(
      SourceId::kOpenLibrary, cfg,
      [&](const std::string& url) -> std::optional<std::string> {
        urls.push_back(url);
        return ++calls < 3 ? std::nullopt : std::optional<std::string>("Zola");
      },
      [](const std::string& body) { return std::optional<std::vector<std::string>>({body}); },
      [&](std::chrono::duration<double> d) { sleeps.push_back(d.count()); });
  const auto answer = adapter.lookup(kIsbn);
  EXPECT_EQ(answer.status, AnswerStatus::kFound);
  EXPECT_EQ(answer.author_names, (std::vector<std::string>{"zola"}));
  ASSERT_EQ(urls.size(), 3u);
  EXPECT_EQ(urls[0], "https://example.test/isbn/9780306406157");
  double backoff = 0;
  for (double s : sleeps) backoff = std::max(backoff, s);
  EXPECT_NEAR(backoff, 1.0, 0.01);  // 0.5, then doubled
}

TEST(LiveAdapter, ExhaustedRetriesAreUnavailable) {
  LiveSourceConfig cfg;
  cfg.endpoint = "x/{isbn}";
  cfg.max_retries = 2;
  cfg.requests_per_second = 1e6;
  int calls = 0;
  LiveSourceAdapter adapter(
      SourceId::kSudoc, cfg, [&](const std::string&) -> std::optional<std::string> { ++calls; return std::nullopt; },
      [](const std::string&) { return std::optional<std::vector<std::string>>(); },
      [](std::chrono::duration<double>) {});
  const auto answer = adapter.lookup(kIsbn);
  EXPECT_EQ(answer.status, AnswerStatus::kUnavailable);
  EXPECT_EQ(calls, 3);
}

TEST(LiveAdapter, EmptyBodyIsNotFound) {
  LiveSourceConfig cfg;
  cfg.endpoint = "x/{isbn}";
  LiveSourceAdapter adapter(
      SourceId::kSudoc, cfg, [](const std::string&) { return std::optional<std::string>(""); },
      [](const std::string&) { return std::optional<std::vector<std::string>>(std::vector<std::string>{}); },
      [](std::chrono::duration<double>) {});
  EXPECT_EQ(adapter.lookup(kIsbn).status, AnswerStatus::kNotFound);
}

TEST(LiveSourceConfig, ReadsKeys) {
  const auto c = Config::parse("source.bnf.endpoint = http://bnf/{isbn}\nsource.bnf.max_retries = 5\n");
  const auto cfg = LiveSourceConfig::from_config(c, SourceId::kBnf);
  EXPECT_EQ(cfg.endpoint, "http://bnf/{isbn}");
  EXPECT_EQ(cfg.max_retries, 5);
  EXPECT_EQ(cfg.requests_per_second, 1.0);
}

}  // namespace
}  // namespace authnorm
