#include "authnorm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "authnorm/error.hpp"
#include "authnorm/textnorm.hpp"
#include "jsonl.hpp"

namespace authnorm {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json book_json(const BookRecord& b) {
  json doc;
  doc["isbn"] = b.isbn ? json(*b.isbn) : json(nullptr);
  doc["title"] = b.title;
  doc["author"] = b.author_raw;
  return doc;
}

json origin_json(const OriginFlags& o) {
  json sources = json::array();
  for (SourceId id : all_sources()) {
    if (o.sources[source_index(id)]) sources.push_back(std::string(slug(id)));
  }
  return json{{"sources", sources}, {"input", o.input}, {"seq2seq", o.seq2seq}, {"siamese", o.siamese}};
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

}  // namespace

NormalizationResult propose(const BookRecord& book, const PipelineModels& models,
                            const SourceSet* sources, const PipelineOptions& options) {
  if (!models.siamese) throw ValidationError("pipeline: a Siamese model is required");
  if (options.channels.siamese && !models.index) {
    throw ValidationError("pipeline: the Siamese channel needs a name index");
  }
  if (options.channels.seq2seq && !models.seq2seq) {
    throw ValidationError("pipeline: the seq2seq channel needs a seq2seq model");
  }
  if (options.channels.sources && !sources) {
    throw ValidationError("pipeline: the source channel needs bibliographic sources");
  }

  NormalizationResult result;
  result.book = book;
  result.input = normalized(effective_author(book));
  auto& diag = result.diagnostics;

  // Insertion-ordered candidate set; the final order comes from ranking.
  std::vector<std::string> order;
  std::map<std::string, bool> seen;
  auto offer = [&](const std::string& c) {
    if (c.empty() || seen.count(c)) return;
    seen[c] = true;
    order.push_back(c);
  };

  AggregateAnswer answers;
  bool have_answers = false;
  if (options.channels.sources) {
    Stopwatch w;
    answers = aggregate_record(*sources, book);
    have_answers = true;
    diag.isbn_matched = any_found(answers);
    for (const auto& a : answers) {
      if (a.status == AnswerStatus::kFound) {
        for (const auto& name : a.author_names) offer(name);
      }
    }
    diag.channels.push_back("sources");
    diag.timings_ms["sources"] = w.elapsed_ms();
  }

  std::vector<NameMatch> matches;
  bool ran_siamese = false;
  if (options.channels.siamese && !result.input.empty()) {
    Stopwatch w;
    matches = match_name(*models.siamese, *models.index, result.input, options.siamese_k,
                         options.siamese_threshold, options.search_budget);
    for (const auto& m : matches) offer(m.canonical);
    ran_siamese = true;
    diag.channels.push_back("siamese");
    diag.timings_ms["siamese"] = w.elapsed_ms();
  }

  std::vector<std::string> corrections;
  bool ran_seq2seq = false;
  if (options.channels.seq2seq) {
    Stopwatch w;
    corrections = correct_name(*models.seq2seq, result.input, options.beam_width);
    for (const auto& c : corrections) offer(c);
    ran_seq2seq = true;
    diag.channels.push_back("seq2seq");
    diag.timings_ms["seq2seq"] = w.elapsed_ms();
  }

  offer(result.input);

  Stopwatch features_watch;
  CandidateContext ctx;
  ctx.input = result.input;
  ctx.sources = have_answers ? &answers : nullptr;
  ctx.seq2seq_top = ran_seq2seq ? &corrections : nullptr;
  ctx.siamese_matches = ran_siamese ? &matches : nullptr;
  ctx.siamese = models.siamese;
  ctx.input_repr = models.siamese->encode(result.input);
  for (const auto& c : order) {
    Proposal p;
    p.candidate = c;
    p.features = extract_features(c, ctx);
    p.origin = origin_of(p.features);
    result.proposals.push_back(std::move(p));
  }
  diag.timings_ms["features"] = features_watch.elapsed_ms();
  return result;
}

NormalizationResult normalize_book(const BookRecord& book, const PipelineModels& models,
                                   const SourceSet* sources, const PipelineOptions& options) {
  if (!models.ranker) throw ValidationError("pipeline: a ranker model is required");
  auto result = propose(book, models, sources, options);
  for (auto& p : result.proposals) p.score = score(*models.ranker, p.features);
  rank(result.proposals);
  return result;
}

std::vector<RankerSample> ranker_samples(const std::vector<NormalizationResult>& results,
                                         const std::vector<AnnotatedBook>& annotated) {
  if (results.size() != annotated.size()) {
    throw ValidationError("ranker_samples: results and annotations differ in size");
  }
  std::vector<RankerSample> out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto truth = normalized(annotated[i].ground_truth);
    for (const auto& p : results[i].proposals) {
      out.push_back({p.features, p.candidate == truth ? 1 : 0});
    }
  }
  return out;
}

const std::vector<std::string>& stratum_names() {
  static const std::vector<std::string> kNames{"all", "unnormalized input", "no ISBN match",
                                               "unnormalized, no ISBN match"};
  return kNames;
}

const StratumRow& EvaluationTable::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ValidationError("no stratum named \"" + name + "\"");
}

std::string EvaluationTable::format() const {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-30s %7s", "stratum", "books");
  out << buf;
  for (auto k : ks) {
    std::snprintf(buf, sizeof buf, " %8s", ("acc@" + std::to_string(k)).c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-30s %7zu", r.name.c_str(), r.books);
    out << buf;
    for (double a : r.accuracy) {
      std::snprintf(buf, sizeof buf, " %8s", r.books ? percent(a).c_str() : "-");
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string EvaluationTable::to_json() const {
  json doc;
  doc["k"] = ks;
  doc["strata"] = json::array();
  for (const auto& r : rows) {
    json row{{"name", r.name}, {"books", r.books}, {"correct", r.correct}, {"accuracy", r.accuracy}};
    doc["strata"].push_back(std::move(row));
  }
  return detail::dump_line(doc);
}

EvaluationTable evaluate(const std::vector<AnnotatedBook>& annotated,
                         const std::vector<NormalizationResult>& results,
                         const std::vector<std::size_t>& ks) {
  if (annotated.empty()) throw ValidationError("evaluate: empty annotated set");
  if (annotated.size() != results.size()) {
    throw ValidationError("evaluate: results and annotations differ in size");
  }
  if (ks.empty() || std::any_of(ks.begin(), ks.end(), [](std::size_t k) { return k == 0; })) {
    throw ValidationError("evaluate: k values must be positive");
  }
  EvaluationTable table;
  table.ks = ks;
  for (const auto& name : stratum_names()) {
    table.rows.push_back({name, 0, std::vector<std::size_t>(ks.size(), 0), {}});
  }
  for (std::size_t i = 0; i < annotated.size(); ++i) {
    const auto truth = normalized(annotated[i].ground_truth);
    const auto& res = results[i];
    const bool unnormalized = truth != res.input;
    const bool no_match = !res.diagnostics.isbn_matched;
    const std::array<bool, 4> member{true, unnormalized, no_match, unnormalized && no_match};
    for (std::size_t s = 0; s < member.size(); ++s) {
      if (!member[s]) continue;
      auto& row = table.rows[s];
      ++row.books;
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const std::size_t top = std::min(ks[j], res.proposals.size());
        for (std::size_t r = 0; r < top; ++r) {
          if (normalized(res.proposals[r].candidate) == truth) {
            ++row.correct[j];
            break;
          }
        }
      }
    }
  }
  for (auto& row : table.rows) {
    for (std::size_t c : row.correct) {
      row.accuracy.push_back(row.books ? static_cast<double>(c) / static_cast<double>(row.books) : 0.0);
    }
  }
  return table;
}

std::string result_to_json(const NormalizationResult& result, bool with_timings) {
  json doc;
  doc["book"] = book_json(result.book);
  doc["input"] = result.input;
  doc["isbn_matched"] = result.diagnostics.isbn_matched;
  doc["channels"] = result.diagnostics.channels;
  doc["candidates"] = json::array();
  for (const auto& p : result.proposals) {
    json c;
    c["candidate"] = p.candidate;
    c["score"] = p.score ? json(*p.score) : json(nullptr);
    c["origin"] = origin_json(p.origin);
    c["features"] = p.features;
    doc["candidates"].push_back(std::move(c));
  }
  if (with_timings) doc["timings_ms"] = result.diagnostics.timings_ms;
  return detail::dump_line(doc);
}

void write_results(const std::filesystem::path& path,
                   const std::vector<NormalizationResult>& results, bool with_timings) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : results) out << result_to_json(r, with_timings) << '\n';
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace authnorm
