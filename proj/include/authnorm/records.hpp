#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace authnorm {

/// One catalog row as provided by a seller.
struct BookRecord {
  std::optional<std::string> isbn;
  std::string title;
  std::string author_raw;

  bool operator==(const BookRecord&) const = default;
};

/// Seller placeholder for a missing author; kept verbatim at load time.
inline constexpr std::string_view kUnknownAuthor = "Unknown";

/// Author string with the "Unknown" placeholder mapped to empty.
std::string effective_author(const BookRecord& record);

enum class Provenance { kIsbnMatch, kFuzzyMatch, kNameVariantList, kSynthetic };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// A surface form of an entity. Synthetic variants record the rule that
/// produced them and the variant they were derived from.
struct Variant {
  std::string text;
  Provenance provenance = Provenance::kNameVariantList;
  std::string rule;          // synthetic only
  std::string derived_from;  // synthetic only

  bool operator==(const Variant&) const = default;
};

/// Canonical name plus its deduplicated surface forms. The canonical name is
/// always one of the variants.
class NameEntity {
 public:
  NameEntity() = default;
  NameEntity(std::string canonical, Provenance provenance);

  const std::string& canonical() const { return canonical_; }
  const std::vector<Variant>& variants() const { return variants_; }

  bool contains(std::string_view text) const;

  /// Adds a variant unless an equal text is already present. Returns true if
  /// the variant was new.
  bool add(Variant v);

  /// Variant texts in insertion order, canonical first.
  std::vector<std::string> texts() const;

  bool operator==(const NameEntity&) const = default;

 private:
  std::string canonical_;
  std::vector<Variant> variants_;
};

struct AnnotatedBook {
  BookRecord record;
  std::string ground_truth;

  bool operator==(const AnnotatedBook&) const = default;
};

/// f0-f7 source flags in frozen source order, f8 equals-input, f9 seq2seq
/// top-10, f10 Siamese match, f11 cosine distance to the input name.
inline constexpr std::size_t kFeatureCount = 12;
using FeatureVector = std::array<double, kFeatureCount>;

struct OriginFlags {
  std::array<bool, 8> sources{};
  bool input = false;
  bool seq2seq = false;
  bool siamese = false;

  int source_count() const;
  bool operator==(const OriginFlags&) const = default;
};

struct Proposal {
  std::string candidate;
  OriginFlags origin;
  FeatureVector features{};
  std::optional<double> score;
};

// Line-delimited record files. Blank lines are ignored; every other line is
// one JSON object. Errors carry the 1-based line number and field name.
std::vector<BookRecord> load_books(const std::filesystem::path& path);
std::vector<NameEntity> load_entities(const std::filesystem::path& path);
std::vector<AnnotatedBook> load_annotated(const std::filesystem::path& path);

void write_books(const std::filesystem::path& path,
                 const std::vector<BookRecord>& records);
void write_entities(const std::filesystem::path& path,
                    const std::vector<NameEntity>& entities);
void write_annotated(const std::filesystem::path& path,
                     const std::vector<AnnotatedBook>& books);

}  // namespace authnorm
