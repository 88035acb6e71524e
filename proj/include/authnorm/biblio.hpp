#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "authnorm/config.hpp"
#include "authnorm/isbn.hpp"

namespace authnorm {

/// The eight bibliographic sources. The order is frozen: it defines ranker
/// feature indices 0-7.
enum class SourceId { kOpenLibrary, kIsbnDb, kGoodreads, kGoogleBooks, kOclc, kBnf, kSudoc, kBabelio };

inline constexpr std::size_t kSourceCount = 8;

const std::array<SourceId, kSourceCount>& all_sources();
std::size_t source_index(SourceId id);
/// File-name slug, e.g. "openlibrary".
std::string_view slug(SourceId id);
std::string_view display_name(SourceId id);
SourceId source_from_slug(std::string_view s);

enum class AnswerStatus { kFound, kNotFound, kUnavailable };
std::string_view to_string(AnswerStatus s);

struct SourceAnswer {
  SourceId source = SourceId::kOpenLibrary;
  std::vector<std::string> author_names;  // normalized; non-empty iff found
  AnswerStatus status = AnswerStatus::kNotFound;
  std::string diagnostic;

  bool operator==(const SourceAnswer&) const = default;
};

/// One answer per source, in frozen order.
using AggregateAnswer = std::array<SourceAnswer, kSourceCount>;

bool any_found(const AggregateAnswer& answers);

class BibliographicSource {
 public:
  virtual ~BibliographicSource() = default;
  virtual SourceId id() const = 0;
  /// Never throws; failures come back as kUnavailable with a diagnostic.
  virtual SourceAnswer lookup(const Isbn& isbn) const = 0;
};

/// Offline table keyed by canonical ISBN-13. File format, one JSON object
/// per line: {"isbn13": "...", "authors": ["..."]} or
/// {"isbn13": "...", "unavailable": true} to simulate a transport failure.
class FixtureSource : public BibliographicSource {
 public:
  struct Entry {
    std::vector<std::string> authors;
    bool unavailable = false;
  };

  FixtureSource(SourceId id, std::map<std::string, Entry> table)
      : id_(id), table_(std::move(table)) {}

  /// Reads <dir>/<slug>.jsonl; a missing file is an empty table.
  static FixtureSource load(const std::filesystem::path& dir, SourceId id);
  void save(const std::filesystem::path& dir) const;

  SourceId id() const override { return id_; }
  SourceAnswer lookup(const Isbn& isbn) const override;
  const std::map<std::string, Entry>& table() const { return table_; }

 private:
  SourceId id_;
  std::map<std::string, Entry> table_;
};

/// Settings for a live adapter, read from keys "source.<slug>.endpoint",
/// ".requests_per_second", ".max_retries" and ".backoff_seconds".
struct LiveSourceConfig {
  std::string endpoint;  // "{isbn}" is replaced by the ISBN-13
  double requests_per_second = 1.0;
  int max_retries = 3;
  double backoff_seconds = 0.5;

  static LiveSourceConfig from_config(const Config& config, SourceId id);
};

/// Reference adapter for an HTTP-style service. Transport and response
/// parsing are injected so the contract can be exercised offline. Requests
/// are serialized and spaced by the rate limit; failed requests are retried
/// with exponential backoff.
class LiveSourceAdapter : public BibliographicSource {
 public:
  /// Returns the response body, or nullopt on a transport failure.
  using Transport = std::function<std::optional<std::string>(const std::string& url)>;
  /// Author names from a body; nullopt when the body is not understood.
  using Parser = std::function<std::optional<std::vector<std::string>>(const std::string& body)>;
  using Sleeper = std::function<void(std::chrono::duration<double>)>;

  LiveSourceAdapter(SourceId id, LiveSourceConfig config, Transport transport, Parser parser,
                    Sleeper sleeper = {});

  SourceId id() const override { return id_; }
  SourceAnswer lookup(const Isbn& isbn) const override;

 private:
  SourceId id_;
  LiveSourceConfig config_;
  Transport transport_;
  Parser parser_;
  Sleeper sleeper_;
  mutable std::mutex mutex_;
  mutable std::optional<std::chrono::steady_clock::time_point> last_request_;
};

/// The eight sources in frozen order.
class SourceSet {
 public:
  SourceSet() = default;
  explicit SourceSet(std::array<std::unique_ptr<BibliographicSource>, kSourceCount> sources);

  /// Fixture tables for all eight sources from one directory.
  static SourceSet fixtures(const std::filesystem::path& dir);

  const BibliographicSource& at(SourceId id) const;

 private:
  std::array<std::unique_ptr<BibliographicSource>, kSourceCount> sources_;
};

/// Queries every source for the ISBN. Always eight entries.
AggregateAnswer aggregate(const SourceSet& sources, const Isbn& isbn);

/// Answers for a book; all not-found when the record has no valid ISBN.
AggregateAnswer aggregate_record(const SourceSet& sources, const BookRecord& record);

}  // namespace authnorm
