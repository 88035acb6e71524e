// Command-line front end. Exit codes: 0 success, 1 invalid input or usage,
// 2 internal failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "authnorm/ann_index.hpp"
#include "authnorm/biblio.hpp"
#include "authnorm/config.hpp"
#include "authnorm/dataset.hpp"
#include "authnorm/error.hpp"
#include "authnorm/gradients.hpp"
#include "authnorm/pipeline.hpp"
#include "authnorm/ranker.hpp"
#include "authnorm/seq2seq.hpp"
#include "authnorm/siamese.hpp"
#include "authnorm/synth.hpp"
#include "authnorm/textnorm.hpp"
#include "authnorm/workflow.hpp"

namespace fs = std::filesystem;
using namespace authnorm;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
};

Config load_config(const Globals& g) { return g.config.empty() ? Config{} : Config::load(g.config); }

WorkflowSettings settings(const Globals& g) { return WorkflowSettings::from_config(load_config(g), g.seed); }

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw ValidationError("--out is required for this command");
  return g.out;
}

/// Models written by the training commands, looked up by file name.
struct ModelDir {
  std::optional<SiameseModel> siamese;
  std::optional<Seq2SeqModel> seq2seq;
  std::optional<RpForestIndex> index;
  std::optional<LogisticModel> ranker;

  static ModelDir load(const fs::path& dir, bool need_ranker) {
    if (!fs::is_directory(dir)) throw ValidationError("model directory not found: " + dir.string());
    ModelDir m;
    m.siamese = SiameseModel::load(dir / "siamese.anmc");
    if (fs::exists(dir / "seq2seq.anmc")) m.seq2seq = Seq2SeqModel::load(dir / "seq2seq.anmc");
    if (fs::exists(dir / "index.annx")) m.index = RpForestIndex::load(dir / "index.annx");
    if (need_ranker) m.ranker = LogisticModel::load(dir / "ranker.anmc");
    return m;
  }

  PipelineModels view() const {
    return {siamese ? &*siamese : nullptr, seq2seq ? &*seq2seq : nullptr, index ? &*index : nullptr,
            ranker ? &*ranker : nullptr};
  }
};

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ValidationError("--k expects positive integers separated by commas, got \"" + text + "\"");
    }
  }
  if (ks.empty()) throw ValidationError("--k is empty");
  return ks;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

void print_epoch(const char* what, int epoch, double loss) {
  std::cerr << what << " epoch " << epoch + 1 << " loss " << loss << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Author-name normalization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Root seed for every random choice");
  app.add_option("--config", g.config, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output file or directory");

  // build-entities
  auto* build = app.add_subcommand("build-entities", "Build name entities from fixtures");
  std::string fixtures;
  bool no_matches = false, no_fuzzy = false, no_list = false;
  std::string ambiguity_log;
  build->add_option("--fixtures", fixtures, "Fixture directory")->required();
  build->add_flag("--no-matches", no_matches, "Skip the ISBN-match channel");
  build->add_flag("--no-fuzzy", no_fuzzy, "Skip the fuzzy reference-name channel");
  build->add_flag("--no-variant-list", no_list, "Skip the variant-list channel");
  build->add_option("--ambiguity-log", ambiguity_log, "Where to write skipped fuzzy matches");

  auto* aug = app.add_subcommand("augment", "Add synthetic variants");
  std::string entities_path, rules_text;
  aug->add_option("--entities", entities_path)->required();
  aug->add_option("--rules", rules_text, "Comma-separated rule ids (default: all five)");

  auto* split_cmd = app.add_subcommand("split", "Entity-level train/test split");
  double ratio = 0.5;
  split_cmd->add_option("--entities", entities_path)->required();
  split_cmd->add_option("--ratio", ratio);

  auto* train_siam = app.add_subcommand("train-siamese", "Train the Siamese encoder");
  train_siam->add_option("--entities", entities_path)->required();

  auto* train_s2s = app.add_subcommand("train-seq2seq", "Train the seq2seq corrector");
  train_s2s->add_option("--entities", entities_path)->required();

  auto* build_index = app.add_subcommand("build-index", "Index canonical names");
  std::string models_dir;
  build_index->add_option("--entities", entities_path)->required();
  build_index->add_option("--models", models_dir, "Directory with siamese.anmc")->required();

  auto* train_rank = app.add_subcommand("train-ranker", "Train the proposal ranker");
  std::string annotated_path, sources_dir;
  train_rank->add_option("--annotated", annotated_path)->required();
  train_rank->add_option("--models", models_dir)->required();
  train_rank->add_option("--sources", sources_dir, "Fixture source directory")->required();

  auto* match = app.add_subcommand("match", "Nearest canonical names for a name");
  std::string name;
  std::size_t k = 3;
  match->add_option("--models", models_dir)->required();
  match->add_option("--name", name)->required();
  match->add_option("--k", k);

  auto* correct = app.add_subcommand("correct", "Seq2seq corrections for a name");
  std::size_t beam = 10;
  correct->add_option("--models", models_dir)->required();
  correct->add_option("--name", name)->required();
  correct->add_option("--beam", beam);

  bool no_sources = false, no_siamese = false, no_seq2seq = false, timings = false;
  auto add_channel_flags = [&](CLI::App* cmd) {
    cmd->add_flag("--no-sources", no_sources, "Disable ISBN source lookups");
    cmd->add_flag("--no-siamese", no_siamese, "Disable the Siamese channel");
    cmd->add_flag("--no-seq2seq", no_seq2seq, "Disable the seq2seq channel");
  };
  auto* norm = app.add_subcommand("normalize", "Rank canonical-name proposals for books");
  std::string books_path;
  norm->add_option("--books", books_path)->required();
  norm->add_option("--models", models_dir)->required();
  norm->add_option("--sources", sources_dir);
  norm->add_flag("--timings", timings, "Include per-channel timings");
  add_channel_flags(norm);

  auto* eval = app.add_subcommand("evaluate", "Top-k accuracy on an annotated set");
  std::string ks_text = "1,3,10";
  eval->add_option("--annotated", annotated_path)->required();
  eval->add_option("--models", models_dir)->required();
  eval->add_option("--sources", sources_dir);
  eval->add_option("--k", ks_text, "Comma-separated k values");
  add_channel_flags(eval);

  auto* grad = app.add_subcommand("grad-check", "Finite-difference gradient checks");

  auto* gen = app.add_subcommand("generate-fixtures", "Write a synthetic fixture world");
  SynthConfig synth;
  gen->add_option("--entities", synth.entities);
  gen->add_option("--books", synth.catalog_books);
  gen->add_option("--annotated", synth.annotated_books);

  auto* run_all = app.add_subcommand("run-all", "Every stage on a fixture directory");
  run_all->add_option("--fixtures", fixtures)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    PipelineOptions options;
    auto channel_options = [&](const WorkflowSettings& s) {
      options = s.pipeline;
      options.channels = {!no_sources, !no_siamese, !no_seq2seq};
      if (options.channels.sources && sources_dir.empty()) {
        throw ValidationError("--sources is required unless --no-sources is given");
      }
    };

    if (*build) {
      const auto result = build_entities(fixtures, {!no_matches, !no_fuzzy, !no_list});
      write_entities(require_out(g), result.entities);
      std::ostream* log = &std::cerr;
      std::ofstream log_file;
      if (!ambiguity_log.empty()) {
        log_file.open(ambiguity_log, std::ios::trunc);
        if (!log_file) throw IoError("cannot open " + ambiguity_log);
        log = &log_file;
      }
      for (const auto& line : result.ambiguous) *log << line << '\n';
      std::cerr << result.entities.size() << " entities\n";
    } else if (*aug) {
      auto s = settings(g);
      if (!rules_text.empty()) {
        Config c;
        c.set("dataset.rules", rules_text);
        s.rules = WorkflowSettings::from_config(c, g.seed).rules;
      }
      AugmentReport report;
      const auto out = augment(load_entities(entities_path), s.rules, derive_seed(g.seed, "augment"), &report);
      write_entities(require_out(g), out);
      for (const auto& [rule, n] : report.added) std::cerr << rule << ": added " << n << '\n';
      for (const auto& [rule, n] : report.no_op) std::cerr << rule << ": no-op " << n << '\n';
    } else if (*split_cmd) {
      const auto dir = require_out(g);
      fs::create_directories(dir);
      const auto [train, test] = split(load_entities(entities_path), ratio, g.seed);
      write_entities(dir / "train.jsonl", train);
      write_entities(dir / "test.jsonl", test);
      std::cerr << train.size() << " train / " << test.size() << " test entities\n";
    } else if (*train_siam) {
      const auto s = settings(g);
      const auto result = train_siamese(load_entities(entities_path), s.siamese_train, s.siamese_shape,
                                        [](int e, double l) { print_epoch("siamese", e, l); });
      result.model.save(require_out(g));
    } else if (*train_s2s) {
      const auto s = settings(g);
      const auto result = train_seq2seq(correction_pairs(load_entities(entities_path), true),
                                        s.seq2seq_train, s.seq2seq_shape,
                                        [](int e, double l) { print_epoch("seq2seq", e, l); });
      result.model.save(require_out(g));
    } else if (*build_index) {
      const auto s = settings(g);
      const auto model = SiameseModel::load(fs::path(models_dir) / "siamese.anmc");
      build_canonical_index(model, load_entities(entities_path), s.ann).save(require_out(g));
    } else if (*train_rank) {
      const auto s = settings(g);
      const auto models = ModelDir::load(models_dir, false);
      const auto sources = SourceSet::fixtures(sources_dir);
      const auto annotated = load_annotated(annotated_path);
      std::vector<NormalizationResult> proposals;
      for (const auto& b : annotated) proposals.push_back(propose(b.record, models.view(), &sources, s.pipeline));
      auto samples = ranker_samples(proposals, annotated);
      if (s.ranker_oversample) samples = oversample(samples, s.ranker.seed);
      const auto model = train_logreg(samples, s.ranker);
      model.save(require_out(g));
      const auto recall = class_recall(model, samples);
      std::cerr << "training recall: positive " << recall.positive << ", negative " << recall.negative
                << ", loss " << model.final_loss << '\n';
    } else if (*match) {
      const auto models = ModelDir::load(models_dir, false);
      if (!models.index) throw ValidationError("no index.annx in " + models_dir);
      for (const auto& m : match_name(*models.siamese, *models.index, normalized(name), k)) {
        std::cout << m.canonical << '\t' << m.distance << '\n';
      }
    } else if (*correct) {
      const auto models = ModelDir::load(models_dir, false);
      if (!models.seq2seq) throw ValidationError("no seq2seq.anmc in " + models_dir);
      for (const auto& [text, lp] : beam_decode(*models.seq2seq, name, beam)) {
        std::cout << text << '\t' << lp << '\n';
      }
    } else if (*norm) {
      channel_options(settings(g));
      const auto models = ModelDir::load(models_dir, true);
      std::optional<SourceSet> sources;
      if (options.channels.sources) sources = SourceSet::fixtures(sources_dir);
      std::vector<NormalizationResult> results;
      for (const auto& b : load_books(books_path)) {
        results.push_back(normalize_book(b, models.view(), sources ? &*sources : nullptr, options));
      }
      write_results(require_out(g), results, timings);
    } else if (*eval) {
      channel_options(settings(g));
      const auto ks = parse_ks(ks_text);
      const auto models = ModelDir::load(models_dir, true);
      std::optional<SourceSet> sources;
      if (options.channels.sources) sources = SourceSet::fixtures(sources_dir);
      const auto annotated = load_annotated(annotated_path);
      std::vector<NormalizationResult> results;
      for (const auto& b : annotated) {
        results.push_back(normalize_book(b.record, models.view(), sources ? &*sources : nullptr, options));
      }
      const auto table = evaluate(annotated, results, ks);
      std::cout << table.format();
      if (!g.out.empty()) write_text(g.out, table.to_json() + "\n");
    } else if (*grad) {
      bool ok = true;
      for (const auto& check : check_all_gradients(g.seed)) {
        std::cout << (check.report.passed() ? "ok   " : "FAIL ") << check.name
                  << "  max relative error " << check.report.max_relative_error << '\n';
        ok = ok && check.report.passed();
      }
      return ok ? 0 : 2;
    } else if (*gen) {
      synth.seed = g.seed;
      write_world(generate_world(synth), require_out(g));
    } else if (*run_all) {
      const auto report = run_workflow(fixtures, require_out(g), settings(g), &std::cerr);
      std::cout << report.evaluation.format() << "\nISBN-only ablation\n" << report.isbn_only.format();
      std::cout << "ranker recall: positive " << report.ranker_recall.positive << ", negative "
                << report.ranker_recall.negative << '\n';
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
