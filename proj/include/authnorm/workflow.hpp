#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "authnorm/ann_index.hpp"
#include "authnorm/config.hpp"
#include "authnorm/dataset.hpp"
#include "authnorm/pipeline.hpp"
#include "authnorm/ranker.hpp"
#include "authnorm/seq2seq.hpp"
#include "authnorm/siamese.hpp"

namespace authnorm {

/// Every tunable of the end-to-end run, with module seeds derived from one
/// root seed.
struct WorkflowSettings {
  std::uint64_t seed = 0;
  SiameseShape siamese_shape;
  SiameseTrainConfig siamese_train;
  Seq2SeqShape seq2seq_shape;
  Seq2SeqTrainConfig seq2seq_train;
  AnnParams ann;
  LogRegConfig ranker;
  bool ranker_oversample = true;
  PipelineOptions pipeline;
  std::vector<VariantRule> rules = all_rules();
  double split_ratio = 0.5;
  std::vector<std::size_t> ks{1, 3, 10};

  /// Reads the keys documented in configs/desk.conf; absent keys keep
  /// their defaults.
  static WorkflowSettings from_config(const Config& config, std::uint64_t seed);
};

struct EntityChannels {
  bool matches = true;
  bool fuzzy = true;
  bool variant_list = true;
};

struct EntityBuild {
  std::vector<NameEntity> entities;
  std::vector<std::string> ambiguous;
  std::map<std::string, std::size_t> channel_entities;  // before merging
};

/// ISBN answers for every catalog record with a valid ISBN.
MatchTable match_catalog(const std::vector<BookRecord>& records, const SourceSet& sources);

/// Entities from a fixture directory (catalog.jsonl, sources/,
/// reference.txt, variant_list.jsonl) through the selected channels.
EntityBuild build_entities(const std::filesystem::path& fixtures, const EntityChannels& channels);

/// Index over the entities' canonical names.
RpForestIndex build_canonical_index(const SiameseModel& model,
                                    const std::vector<NameEntity>& entities, AnnParams params);

/// Deterministic book-level split of the annotated set.
std::pair<std::vector<AnnotatedBook>, std::vector<AnnotatedBook>> split_books(
    const std::vector<AnnotatedBook>& books, double ratio, std::uint64_t seed);

struct WorkflowReport {
  std::size_t entities = 0;
  std::size_t variants = 0;
  std::vector<double> siamese_loss;
  std::vector<double> seq2seq_loss;
  ClassRecall ranker_recall;  // on the held-out half
  EvaluationTable evaluation;
  EvaluationTable isbn_only;  // Siamese and seq2seq channels disabled
};

/// Runs every stage on a fixture directory and writes the artifacts into
/// out_dir: entities.jsonl, entities_augmented.jsonl, siamese.anmc,
/// seq2seq.anmc, index.annx, ranker.anmc, results.jsonl, evaluation.txt,
/// evaluation.json and evaluation_isbn_only.txt. Progress goes to log when
/// given.
WorkflowReport run_workflow(const std::filesystem::path& fixtures,
                            const std::filesystem::path& out_dir, const WorkflowSettings& settings,
                            std::ostream* log = nullptr);

}  // namespace authnorm
