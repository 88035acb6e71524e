#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "authnorm/biblio.hpp"
#include "authnorm/records.hpp"
#include "authnorm/rng.hpp"

namespace authnorm {

enum class RuleKind { kInitialAbbreviation, kNameInversion, kCaseChange, kSingleTypo, kDiacriticStrip };
enum class TypoKind { kAny, kInsert, kDelete, kSubstitute, kTranspose };

/// A generator of surface variants. Text form: the rule id, optionally
/// followed by ":<typo kind>" for single-typo, e.g. "single-typo:transpose".
struct VariantRule {
  RuleKind kind = RuleKind::kInitialAbbreviation;
  TypoKind typo = TypoKind::kAny;

  std::string id() const;
  static VariantRule parse(std::string_view text);
  bool operator==(const VariantRule&) const = default;
};

/// All five rules with default parameters.
std::vector<VariantRule> all_rules();

/// Applies the rule to normalized text. Returns nullopt when the rule is a
/// no-op for this input; a returned string always differs from the input.
std::optional<std::string> apply_rule(const VariantRule& rule, std::string_view name, Rng& rng);

/// Canonical election: the single wiki-matched name if exactly one source
/// name is wiki-matched, else the name given by the most sources; ties go
/// to the longer name, then the lexicographically smaller one.
/// Throws ValidationError when no source name is given.
std::string elect_canonical(const std::map<std::string, std::string>& names_by_source,
                            const std::set<std::string>& wiki_matches);

/// Answers per canonical ISBN-13.
using MatchTable = std::map<std::string, AggregateAnswer>;

/// One entity per book with at least one found source: the first name of
/// every found source plus the catalog name. Entities sharing a canonical
/// name are merged.
std::vector<NameEntity> build_entities_from_matches(const std::vector<BookRecord>& records,
                                                    const MatchTable& matches,
                                                    const std::set<std::string>& wiki_names);

/// Links catalog names to reference names with fuzzy_token_match; the
/// reference name is canonical. Several matching references are resolved by
/// the count of exactly shared tokens; remaining ties are skipped and
/// reported in `ambiguous` (one line each).
std::vector<NameEntity> build_entities_fuzzy(const std::vector<BookRecord>& records,
                                             const std::vector<std::string>& reference_names,
                                             std::vector<std::string>* ambiguous = nullptr);

/// Unions entities that share a canonical name. The result is sorted by
/// canonical name with variants sorted (canonical first), so it does not
/// depend on input order. When the same text arrives with different
/// provenance, the smallest (provenance, rule, source) triple is kept.
std::vector<NameEntity> merge_entities(const std::vector<NameEntity>& entities);

struct AugmentReport {
  std::map<std::string, std::size_t> added;    // by rule id
  std::map<std::string, std::size_t> no_op;    // by rule id
  std::map<std::string, std::size_t> present;  // output already a variant
};

/// Applies every rule to every non-synthetic variant. New texts are added
/// with provenance synthetic, the rule id and the source variant. Random
/// choices are seeded per (rule, variant text), so the result does not
/// depend on entity order.
std::vector<NameEntity> augment(const std::vector<NameEntity>& entities,
                                const std::vector<VariantRule>& rules, std::uint64_t seed,
                                AugmentReport* report = nullptr);

/// Entity-level split; the first part holds round(ratio * n) entities.
/// Both parts keep input order. Throws ValidationError unless 0 < ratio < 1.
std::pair<std::vector<NameEntity>, std::vector<NameEntity>> split(
    const std::vector<NameEntity>& entities, double ratio, std::uint64_t seed);

/// Variant counts keyed by provenance tag, and by "synthetic:<rule>".
std::map<std::string, std::size_t> variant_census(const std::vector<NameEntity>& entities);

/// (variant, canonical) pairs for every non-canonical variant, plus
/// (canonical, canonical) when include_canonical is set.
std::vector<std::pair<std::string, std::string>> correction_pairs(
    const std::vector<NameEntity>& entities, bool include_canonical = false);

/// One name per non-blank line, normalized.
std::vector<std::string> load_reference_names(const std::filesystem::path& path);

}  // namespace authnorm
