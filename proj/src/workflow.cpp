#include "authnorm/workflow.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <ostream>
#include <sstream>

#include "authnorm/error.hpp"
#include "authnorm/rng.hpp"

namespace authnorm {

namespace {

std::size_t get_size(const Config& c, const std::string& key, std::size_t fallback) {
  const auto v = c.get(key, static_cast<std::int64_t>(fallback));
  if (v <= 0) throw ValidationError(key + " must be positive");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

std::vector<NormalizationResult> run_books(const std::vector<AnnotatedBook>& books,
                                           const PipelineModels& models, const SourceSet& sources,
                                           const PipelineOptions& options, bool scored) {
  std::vector<NormalizationResult> out;
  out.reserve(books.size());
  for (const auto& b : books) {
    out.push_back(scored ? normalize_book(b.record, models, &sources, options)
                         : propose(b.record, models, &sources, options));
  }
  return out;
}

}  // namespace

WorkflowSettings WorkflowSettings::from_config(const Config& c, std::uint64_t seed) {
  WorkflowSettings s;
  s.seed = seed;
  s.siamese_shape.embed_dim = get_size(c, "siamese.embed_dim", s.siamese_shape.embed_dim);
  s.siamese_shape.hidden = get_size(c, "siamese.hidden", s.siamese_shape.hidden);
  s.siamese_shape.repr_dim = get_size(c, "siamese.repr_dim", s.siamese_shape.repr_dim);
  auto& st = s.siamese_train;
  st.learning_rate = c.get("siamese.learning_rate", st.learning_rate);
  st.clip = c.get("siamese.clip", st.clip);
  st.margin = c.get("siamese.margin", st.margin);
  st.batch_size = get_size(c, "siamese.batch_size", st.batch_size);
  st.epochs = c.get("siamese.epochs", st.epochs);
  st.negative_ratio = c.get("siamese.negative_ratio", st.negative_ratio);
  st.positive_cap = get_size(c, "siamese.positive_cap", st.positive_cap);
  st.seed = derive_seed(seed, "siamese");

  s.seq2seq_shape.embed_dim = get_size(c, "seq2seq.embed_dim", s.seq2seq_shape.embed_dim);
  s.seq2seq_shape.encoder_hidden = get_size(c, "seq2seq.encoder_hidden", s.seq2seq_shape.encoder_hidden);
  auto& qt = s.seq2seq_train;
  qt.learning_rate = c.get("seq2seq.learning_rate", qt.learning_rate);
  qt.clip = c.get("seq2seq.clip", qt.clip);
  qt.batch_size = get_size(c, "seq2seq.batch_size", qt.batch_size);
  qt.epochs = c.get("seq2seq.epochs", qt.epochs);
  qt.seed = derive_seed(seed, "seq2seq");

  s.ann.n_trees = get_size(c, "ann.n_trees", s.ann.n_trees);
  s.ann.leaf_capacity = get_size(c, "ann.leaf_capacity", s.ann.leaf_capacity);
  s.ann.seed = derive_seed(seed, "ann");

  s.ranker.learning_rate = c.get("ranker.learning_rate", s.ranker.learning_rate);
  s.ranker.epochs = c.get("ranker.epochs", s.ranker.epochs);
  s.ranker.seed = derive_seed(seed, "ranker");
  s.ranker_oversample = c.get("ranker.oversample", s.ranker_oversample);

  s.pipeline.siamese_k = get_size(c, "pipeline.siamese_k", s.pipeline.siamese_k);
  s.pipeline.beam_width = get_size(c, "pipeline.beam_width", s.pipeline.beam_width);
  s.pipeline.search_budget =
      static_cast<std::size_t>(c.get("pipeline.search_budget", static_cast<std::int64_t>(0)));
  if (c.has("dataset.rules")) {
    s.rules.clear();
    for (const auto& r : split_list(c.get("dataset.rules", ""))) s.rules.push_back(VariantRule::parse(r));
  }
  s.split_ratio = c.get("dataset.split_ratio", s.split_ratio);
  if (c.has("evaluate.k")) {
    s.ks.clear();
    for (const auto& k : split_list(c.get("evaluate.k", ""))) {
      std::size_t v = 0;
      try {
        v = std::stoul(k);
      } catch (const std::exception&) {
        throw ValidationError("evaluate.k: bad value \"" + k + "\"");
      }
      if (v == 0) throw ValidationError("evaluate.k: values must be positive");
      s.ks.push_back(v);
    }
  }
  if (st.epochs < 0 || qt.epochs < 0 || s.ranker.epochs < 0) {
    throw ValidationError("epoch counts must be non-negative");
  }
  return s;
}

MatchTable match_catalog(const std::vector<BookRecord>& records, const SourceSet& sources) {
  MatchTable out;
  for (const auto& r : records) {
    const auto isbn = record_isbn(r);
    if (!isbn || out.count(isbn->canonical13())) continue;
    out.emplace(isbn->canonical13(), aggregate(sources, *isbn));
  }
  return out;
}

EntityBuild build_entities(const std::filesystem::path& fixtures, const EntityChannels& channels) {
  EntityBuild build;
  std::vector<NameEntity> all;
  const auto catalog = load_books(fixtures / "catalog.jsonl");
  const auto refs_path = fixtures / "reference.txt";
  const auto refs = std::filesystem::exists(refs_path) ? load_reference_names(refs_path)
                                                       : std::vector<std::string>{};
  if (channels.matches) {
    const auto sources = SourceSet::fixtures(fixtures / "sources");
    const std::set<std::string> wiki(refs.begin(), refs.end());
    auto found = build_entities_from_matches(catalog, match_catalog(catalog, sources), wiki);
    build.channel_entities["isbn-match"] = found.size();
    all.insert(all.end(), found.begin(), found.end());
  }
  if (channels.fuzzy) {
    auto found = build_entities_fuzzy(catalog, refs, &build.ambiguous);
    build.channel_entities["fuzzy-match"] = found.size();
    all.insert(all.end(), found.begin(), found.end());
  }
  const auto list_path = fixtures / "variant_list.jsonl";
  if (channels.variant_list && std::filesystem::exists(list_path)) {
    auto listed = load_entities(list_path);
    build.channel_entities["name-variant-list"] = listed.size();
    all.insert(all.end(), listed.begin(), listed.end());
  }
  build.entities = merge_entities(all);
  return build;
}

RpForestIndex build_canonical_index(const SiameseModel& model,
                                    const std::vector<NameEntity>& entities, AnnParams params) {
  std::vector<std::string> names;
  names.reserve(entities.size());
  for (const auto& e : entities) names.push_back(e.canonical());
  return build_name_index(model, names, params);
}

std::pair<std::vector<AnnotatedBook>, std::vector<AnnotatedBook>> split_books(
    const std::vector<AnnotatedBook>& books, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split: ratio must be in (0, 1)");
  std::vector<std::size_t> order(books.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "books.split"));
  rng.shuffle(order);
  const auto first = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(books.size())));
  std::vector<bool> in_first(books.size(), false);
  for (std::size_t i = 0; i < first; ++i) in_first[order[i]] = true;
  std::pair<std::vector<AnnotatedBook>, std::vector<AnnotatedBook>> out;
  for (std::size_t i = 0; i < books.size(); ++i) (in_first[i] ? out.first : out.second).push_back(books[i]);
  return out;
}

WorkflowReport run_workflow(const std::filesystem::path& fixtures,
                            const std::filesystem::path& out_dir, const WorkflowSettings& s,
                            std::ostream* log) {
  auto say = [&](const std::string& line) {
    if (log) *log << line << std::endl;
  };
  std::filesystem::create_directories(out_dir);
  WorkflowReport report;

  auto build = build_entities(fixtures, {});
  write_entities(out_dir / "entities.jsonl", build.entities);
  AugmentReport aug_report;
  const auto entities = augment(build.entities, s.rules, derive_seed(s.seed, "augment"), &aug_report);
  write_entities(out_dir / "entities_augmented.jsonl", entities);
  report.entities = entities.size();
  for (const auto& e : entities) report.variants += e.variants().size();
  say("entities: " + std::to_string(report.entities) + " with " + std::to_string(report.variants) +
      " variants (" + std::to_string(build.ambiguous.size()) + " ambiguous fuzzy matches skipped)");

  auto siamese = train_siamese(entities, s.siamese_train, s.siamese_shape, [&](int e, double l) {
    say("siamese epoch " + std::to_string(e + 1) + " loss " + std::to_string(l));
  });
  report.siamese_loss = siamese.loss_trace;
  siamese.model.save(out_dir / "siamese.anmc");

  auto seq2seq = train_seq2seq(correction_pairs(entities, true), s.seq2seq_train, s.seq2seq_shape,
                               [&](int e, double l) {
                                 say("seq2seq epoch " + std::to_string(e + 1) + " loss " + std::to_string(l));
                               });
  report.seq2seq_loss = seq2seq.loss_trace;
  seq2seq.model.save(out_dir / "seq2seq.anmc");

  const auto index = build_canonical_index(siamese.model, entities, s.ann);
  index.save(out_dir / "index.annx");

  const auto sources = SourceSet::fixtures(fixtures / "sources");
  const auto annotated = load_annotated(fixtures / "annotated.jsonl");
  const auto [train_books, eval_books] = split_books(annotated, s.split_ratio, s.seed);

  PipelineModels models{&siamese.model, &seq2seq.model, &index, nullptr};
  auto train_samples = ranker_samples(
      run_books(train_books, models, sources, s.pipeline, false), train_books);
  if (s.ranker_oversample) train_samples = oversample(train_samples, s.ranker.seed);
  const auto ranker = train_logreg(train_samples, s.ranker);
  ranker.save(out_dir / "ranker.anmc");
  models.ranker = &ranker;
  say("ranker trained on " + std::to_string(train_samples.size()) + " samples, loss " +
      std::to_string(ranker.final_loss));

  const auto results = run_books(eval_books, models, sources, s.pipeline, true);
  write_results(out_dir / "results.jsonl", results);
  report.ranker_recall = class_recall(ranker, ranker_samples(results, eval_books));
  report.evaluation = evaluate(eval_books, results, s.ks);
  write_text(out_dir / "evaluation.txt", report.evaluation.format());
  write_text(out_dir / "evaluation.json", report.evaluation.to_json() + "\n");

  PipelineOptions isbn_only = s.pipeline;
  isbn_only.channels.siamese = false;
  isbn_only.channels.seq2seq = false;
  report.isbn_only = evaluate(eval_books, run_books(eval_books, models, sources, isbn_only, true), s.ks);
  write_text(out_dir / "evaluation_isbn_only.txt", report.isbn_only.format());
  say(report.evaluation.format());
  return report;
}

}  // namespace authnorm
