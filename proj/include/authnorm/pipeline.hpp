#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "authnorm/ann_index.hpp"
#include "authnorm/biblio.hpp"
#include "authnorm/ranker.hpp"
#include "authnorm/records.hpp"
#include "authnorm/seq2seq.hpp"
#include "authnorm/siamese.hpp"

namespace authnorm {

/// Candidate generators that may be switched off, e.g. for ablations.
struct ChannelSet {
  bool sources = true;
  bool siamese = true;
  bool seq2seq = true;
};

struct PipelineOptions {
  std::size_t siamese_k = 3;
  std::size_t beam_width = 10;
  double siamese_threshold = std::numeric_limits<double>::infinity();
  std::size_t search_budget = 0;  // 0: index default
  ChannelSet channels;
};

/// Borrowed models. The Siamese model is always required (it defines
/// feature f11); the index and seq2seq model only for their channels.
struct PipelineModels {
  const SiameseModel* siamese = nullptr;
  const Seq2SeqModel* seq2seq = nullptr;
  const RpForestIndex* index = nullptr;
  const LogisticModel* ranker = nullptr;
};

struct Diagnostics {
  std::vector<std::string> channels;  // channels that ran
  bool isbn_matched = false;          // some source found the ISBN
  std::map<std::string, double> timings_ms;
};

struct NormalizationResult {
  BookRecord book;
  std::string input;  // normalized catalog author
  std::vector<Proposal> proposals;
  Diagnostics diagnostics;
};

/// Candidate generation and features, without scoring. Candidates are the
/// source names, the Siamese top-k, the seq2seq beam, and the input name,
/// deduplicated on normalized text (origin flags are merged). Empty
/// candidates are dropped, so an empty input contributes no candidate.
/// Throws ValidationError when a model needed by an enabled channel is
/// missing.
NormalizationResult propose(const BookRecord& book, const PipelineModels& models,
                            const SourceSet* sources, const PipelineOptions& options);

/// propose, then score every proposal with the ranker and rank them.
NormalizationResult normalize_book(const BookRecord& book, const PipelineModels& models,
                                   const SourceSet* sources, const PipelineOptions& options);

/// Labels each proposal by equality with the normalized ground truth.
std::vector<RankerSample> ranker_samples(const std::vector<NormalizationResult>& results,
                                         const std::vector<AnnotatedBook>& annotated);

/// Names of the four evaluation strata, in report order.
const std::vector<std::string>& stratum_names();

struct StratumRow {
  std::string name;
  std::size_t books = 0;
  std::vector<std::size_t> correct;  // per k
  std::vector<double> accuracy;      // per k; 0 for an empty stratum
};

struct EvaluationTable {
  std::vector<std::size_t> ks;
  std::vector<StratumRow> rows;

  const StratumRow& row(const std::string& name) const;
  /// Fixed-width text table.
  std::string format() const;
  /// Machine-readable form (single JSON document).
  std::string to_json() const;
};

/// Book i is correct at k iff its normalized ground truth is among the top
/// k candidates of results[i]. Throws ValidationError for an empty set,
/// mismatched sizes, or an empty or non-positive k list.
EvaluationTable evaluate(const std::vector<AnnotatedBook>& annotated,
                         const std::vector<NormalizationResult>& results,
                         const std::vector<std::size_t>& ks);

/// One JSON line per result: book, normalized input, ranked candidates with
/// score, origin flags and features. Timings are included only on request
/// because they vary between runs.
std::string result_to_json(const NormalizationResult& result, bool with_timings = false);
void write_results(const std::filesystem::path& path,
                   const std::vector<NormalizationResult>& results, bool with_timings = false);

}  // namespace authnorm
