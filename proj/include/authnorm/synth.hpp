#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "authnorm/biblio.hpp"
#include "authnorm/records.hpp"

namespace authnorm {

/// Knobs for the synthetic catalog world used by the bundled fixtures and
/// the acceptance runs.
struct SynthConfig {
  std::size_t entities = 500;
  std::size_t catalog_books = 2000;
  std::size_t annotated_books = 600;
  std::size_t min_variants = 6;  // synthetic variants per entity
  std::size_t max_variants = 10;
  double isbn_rate = 0.7;
  double reference_rate = 0.8;     // entities with a reference (wiki) name
  double variant_list_rate = 0.3;  // entities exported as a variant list
  std::uint64_t seed = 0;
};

struct SynthAuthor {
  std::string display;  // canonical form with case and diacritics
  std::map<std::string, std::string> raw_tokens;  // normalized token -> display token
};

/// A generated catalog world. `corpus` holds every author as an entity whose
/// variants come from compositions of the variant rules; the other members
/// are the inputs of the entity-building and normalization pipeline.
struct SynthWorld {
  std::vector<SynthAuthor> authors;
  std::vector<NameEntity> corpus;
  std::vector<BookRecord> catalog;
  std::vector<AnnotatedBook> annotated;
  std::vector<FixtureSource> sources;  // frozen source order
  std::vector<std::string> reference_names;
  std::vector<NameEntity> variant_list;
};

SynthWorld generate_world(const SynthConfig& config);

/// Files: corpus.jsonl, catalog.jsonl, annotated.jsonl, reference.txt,
/// variant_list.jsonl and sources/<slug>.jsonl.
void write_world(const SynthWorld& world, const std::filesystem::path& dir);

}  // namespace authnorm
