#include "authnorm/biblio.hpp"

#include <algorithm>
#include <thread>

#include "authnorm/error.hpp"
#include "authnorm/textnorm.hpp"
#include "jsonl.hpp"

namespace authnorm {

using nlohmann::json;

namespace {

struct SourceInfo {
  std::string_view slug;
  std::string_view name;
};

constexpr std::array<SourceInfo, kSourceCount> kInfo{{
    {"openlibrary", "OpenLibrary"},
    {"isbndb", "ISBNdb"},
    {"goodreads", "Goodreads"},
    {"googlebooks", "GoogleBooks"},
    {"oclc", "OCLC"},
    {"bnf", "BnF"},
    {"sudoc", "Sudoc"},
    {"babelio", "Babelio"},
}};

std::vector<std::string> normalized_names(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& name : raw) {
    auto n = normalized(name);
    if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

SourceAnswer not_found(SourceId id, std::string diagnostic = {}) {
  return SourceAnswer{id, {}, AnswerStatus::kNotFound, std::move(diagnostic)};
}

}  // namespace

const std::array<SourceId, kSourceCount>& all_sources() {
  static const std::array<SourceId, kSourceCount> kAll{
      SourceId::kOpenLibrary, SourceId::kIsbnDb, SourceId::kGoodreads, SourceId::kGoogleBooks,
      SourceId::kOclc,        SourceId::kBnf,    SourceId::kSudoc,     SourceId::kBabelio};
  return kAll;
}

std::size_t source_index(SourceId id) { return static_cast<std::size_t>(id); }
std::string_view slug(SourceId id) { return kInfo[source_index(id)].slug; }
std::string_view display_name(SourceId id) { return kInfo[source_index(id)].name; }

SourceId source_from_slug(std::string_view s) {
  for (SourceId id : all_sources()) {
    if (slug(id) == s) return id;
  }
  throw ValidationError("unknown source \"" + std::string(s) + "\"");
}

std::string_view to_string(AnswerStatus s) {
  switch (s) {
    case AnswerStatus::kFound: return "found";
    case AnswerStatus::kNotFound: return "not-found";
    case AnswerStatus::kUnavailable: return "unavailable";
  }
  return "unavailable";
}

bool any_found(const AggregateAnswer& answers) {
  return std::any_of(answers.begin(), answers.end(),
                     [](const SourceAnswer& a) { return a.status == AnswerStatus::kFound; });
}

FixtureSource FixtureSource::load(const std::filesystem::path& dir, SourceId id) {
  const auto path = dir / (std::string(slug(id)) + ".jsonl");
  std::map<std::string, Entry> table;
  if (!std::filesystem::exists(path)) return FixtureSource(id, std::move(table));
  detail::for_each_json_line(path, [&](const json& doc, std::size_t line) {
    const auto it = doc.find("isbn13");
    if (it == doc.end() || !it->is_string()) throw SchemaError(line, "isbn13", "expected a string");
    std::string key;
    try {
      key = Isbn::parse(it->get<std::string>()).canonical13();
    } catch (const ValidationError& e) {
      throw SchemaError(line, "isbn13", e.what());
    }
    Entry entry;
    if (const auto u = doc.find("unavailable"); u != doc.end()) {
      if (!u->is_boolean()) throw SchemaError(line, "unavailable", "expected a boolean");
      entry.unavailable = u->get<bool>();
    }
    if (const auto a = doc.find("authors"); a != doc.end()) {
      if (!a->is_array()) throw SchemaError(line, "authors", "expected an array");
      for (const auto& name : *a) {
        if (!name.is_string()) throw SchemaError(line, "authors", "expected strings");
        entry.authors.push_back(name.get<std::string>());
      }
    } else if (!entry.unavailable) {
      throw SchemaError(line, "authors", "missing");
    }
    if (!table.emplace(key, std::move(entry)).second) {
      throw SchemaError(line, "isbn13", "duplicate key " + key);
    }
  });
  return FixtureSource(id, std::move(table));
}

void FixtureSource::save(const std::filesystem::path& dir) const {
  std::vector<std::pair<std::string, Entry>> rows(table_.begin(), table_.end());
  detail::write_json_lines(dir / (std::string(slug(id_)) + ".jsonl"), rows, [](const auto& row) {
    json doc;
    doc["isbn13"] = row.first;
    if (row.second.unavailable) {
      doc["unavailable"] = true;
    } else {
      doc["authors"] = row.second.authors;
    }
    return doc;
  });
}

SourceAnswer FixtureSource::lookup(const Isbn& isbn) const {
  const auto it = table_.find(isbn.canonical13());
  if (it == table_.end()) return not_found(id_);
  if (it->second.unavailable) {
    return SourceAnswer{id_, {}, AnswerStatus::kUnavailable, "simulated transport failure"};
  }
  auto names = normalized_names(it->second.authors);
  if (names.empty()) return not_found(id_, "entry without author names");
  return SourceAnswer{id_, std::move(names), AnswerStatus::kFound, {}};
}

LiveSourceConfig LiveSourceConfig::from_config(const Config& config, SourceId id) {
  const std::string prefix = "source." + std::string(slug(id)) + ".";
  LiveSourceConfig c;
  c.endpoint = config.get(prefix + "endpoint", "");
  c.requests_per_second = config.get(prefix + "requests_per_second", c.requests_per_second);
  c.max_retries = config.get(prefix + "max_retries", c.max_retries);
  c.backoff_seconds = config.get(prefix + "backoff_seconds", c.backoff_seconds);
  if (c.requests_per_second <= 0.0) throw ValidationError(prefix + "requests_per_second must be positive");
  if (c.max_retries < 0) throw ValidationError(prefix + "max_retries must be non-negative");
  return c;
}

LiveSourceAdapter::LiveSourceAdapter(SourceId id, LiveSourceConfig config, Transport transport,
                                     Parser parser, Sleeper sleeper)
    : id_(id),
      config_(std::move(config)),
      transport_(std::move(transport)),
      parser_(std::move(parser)),
      sleeper_(std::move(sleeper)) {
  if (!sleeper_) {
    sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
  }
}

SourceAnswer LiveSourceAdapter::lookup(const Isbn& isbn) const {
  std::lock_guard lock(mutex_);
  std::string url = config_.endpoint;
  if (const auto pos = url.find("{isbn}"); pos != std::string::npos) {
    url.replace(pos, 6, isbn.canonical13());
  } else {
    url += isbn.canonical13();
  }
  const std::chrono::duration<double> spacing(1.0 / config_.requests_per_second);
  double backoff = config_.backoff_seconds;
  std::string last_error = "transport failure";
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    if (last_request_) {
      const auto elapsed = std::chrono::steady_clock::now() - *last_request_;
      if (elapsed < spacing) sleeper_(spacing - elapsed);
    }
    last_request_ = std::chrono::steady_clock::now();
    std::optional<std::string> body;
    try {
      body = transport_(url);
    } catch (const std::exception& e) {
      last_error = e.what();
      continue;
    }
    if (!body) continue;
    const auto parsed = parser_(*body);
    if (!parsed) {
      last_error = "unrecognized response";
      continue;
    }
    auto names = normalized_names(*parsed);
    if (names.empty()) return not_found(id_);
    return SourceAnswer{id_, std::move(names), AnswerStatus::kFound, {}};
  }
  return SourceAnswer{id_, {}, AnswerStatus::kUnavailable,
                      last_error + " after " + std::to_string(config_.max_retries + 1) + " attempts"};
}

SourceSet::SourceSet(std::array<std::unique_ptr<BibliographicSource>, kSourceCount> sources)
    : sources_(std::move(sources)) {
  for (std::size_t i = 0; i < kSourceCount; ++i) {
    if (!sources_[i]) throw ValidationError("source set: missing source " + std::string(slug(all_sources()[i])));
    if (source_index(sources_[i]->id()) != i) {
      throw ValidationError("source set: sources out of order at " + std::to_string(i));
    }
  }
}

SourceSet SourceSet::fixtures(const std::filesystem::path& dir) {
  std::array<std::unique_ptr<BibliographicSource>, kSourceCount> sources;
  for (SourceId id : all_sources()) {
    sources[source_index(id)] = std::make_unique<FixtureSource>(FixtureSource::load(dir, id));
  }
  return SourceSet(std::move(sources));
}

const BibliographicSource& SourceSet::at(SourceId id) const {
  const auto& s = sources_[source_index(id)];
  if (!s) throw ValidationError("source set is empty");
  return *s;
}

AggregateAnswer aggregate(const SourceSet& sources, const Isbn& isbn) {
  AggregateAnswer out;
  for (SourceId id : all_sources()) {
    SourceAnswer a;
    try {
      a = sources.at(id).lookup(isbn);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      a = SourceAnswer{id, {}, AnswerStatus::kUnavailable, e.what()};
    }
    a.source = id;
    out[source_index(id)] = std::move(a);
  }
  return out;
}

AggregateAnswer aggregate_record(const SourceSet& sources, const BookRecord& record) {
  std::string note;
  if (const auto isbn = record_isbn(record, &note)) return aggregate(sources, *isbn);
  AggregateAnswer out;
  for (SourceId id : all_sources()) {
    out[source_index(id)] = not_found(id, note.empty() ? "no isbn" : note);
  }
  return out;
}

}  // namespace authnorm
