#include "authnorm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include "authnorm/error.hpp"
#include "authnorm/isbn.hpp"
#include "authnorm/textnorm.hpp"

namespace authnorm {

namespace {

struct RuleName {
  RuleKind kind;
  std::string_view id;
};

constexpr std::array<RuleName, 5> kRuleNames{{
    {RuleKind::kInitialAbbreviation, "initial-abbreviation"},
    {RuleKind::kNameInversion, "name-inversion"},
    {RuleKind::kCaseChange, "case-change"},
    {RuleKind::kSingleTypo, "single-typo"},
    {RuleKind::kDiacriticStrip, "diacritic-strip"},
}};

constexpr std::array<std::string_view, 5> kTypoNames{"any", "insert", "delete", "substitute",
                                                     "transpose"};

std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto end = s.find(' ', pos);
    const auto stop = end == std::string_view::npos ? s.size() : end;
    if (stop > pos) out.emplace_back(s.substr(pos, stop - pos));
    pos = stop + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < parts.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += parts[i];
  }
  return out;
}

bool is_letter(char c) { return c >= 'a' && c <= 'z'; }

char random_letter(Rng& rng) { return static_cast<char>('a' + rng.below(26)); }

std::optional<std::string> apply_typo(TypoKind kind, std::string_view name, Rng& rng) {
  if (kind == TypoKind::kAny) {
    kind = static_cast<TypoKind>(1 + rng.below(4));
  }
  std::string s(name);
  std::vector<std::size_t> letters;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_letter(s[i])) letters.push_back(i);
  }
  switch (kind) {
    case TypoKind::kInsert: {
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(rng.below(s.size() + 1)), random_letter(rng));
      return s;
    }
    case TypoKind::kDelete: {
      if (letters.empty() || s.size() < 2) return std::nullopt;
      s.erase(rng.pick(letters), 1);
      return s;
    }
    case TypoKind::kSubstitute: {
      if (letters.empty()) return std::nullopt;
      const auto pos = rng.pick(letters);
      char c;
      do {
        c = random_letter(rng);
      } while (c == s[pos]);
      s[pos] = c;
      return s;
    }
    case TypoKind::kTranspose: {
      std::vector<std::size_t> spots;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (is_letter(s[i]) && is_letter(s[i + 1]) && s[i] != s[i + 1]) spots.push_back(i);
      }
      if (spots.empty()) return std::nullopt;
      const auto pos = rng.pick(spots);
      std::swap(s[pos], s[pos + 1]);
      return s;
    }
    case TypoKind::kAny: break;
  }
  return std::nullopt;
}

auto variant_key(const Variant& v) {
  return std::tie(v.provenance, v.rule, v.derived_from);
}

}  // namespace

std::string VariantRule::id() const {
  std::string out(kRuleNames[static_cast<std::size_t>(kind)].id);
  if (kind == RuleKind::kSingleTypo && typo != TypoKind::kAny) {
    out += ":";
    out += kTypoNames[static_cast<std::size_t>(typo)];
  }
  return out;
}

VariantRule VariantRule::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  for (const auto& r : kRuleNames) {
    if (r.id != head) continue;
    VariantRule rule{r.kind, TypoKind::kAny};
    if (colon == std::string_view::npos) return rule;
    if (r.kind != RuleKind::kSingleTypo) break;
    const auto param = text.substr(colon + 1);
    for (std::size_t i = 0; i < kTypoNames.size(); ++i) {
      if (kTypoNames[i] == param) {
        rule.typo = static_cast<TypoKind>(i);
        return rule;
      }
    }
    break;
  }
  throw ValidationError("unknown variant rule \"" + std::string(text) + "\"");
}

std::vector<VariantRule> all_rules() {
  return {{RuleKind::kInitialAbbreviation}, {RuleKind::kNameInversion}, {RuleKind::kCaseChange},
          {RuleKind::kSingleTypo}, {RuleKind::kDiacriticStrip}};
}

std::optional<std::string> apply_rule(const VariantRule& rule, std::string_view name, Rng& rng) {
  std::optional<std::string> out;
  switch (rule.kind) {
    case RuleKind::kInitialAbbreviation: {
      // Only for forward-order names with a given name before the surname.
      if (name.find(',') != std::string_view::npos) break;
      auto tokens = split_spaces(name);
      if (tokens.size() < 2 || tokens[0].size() <= 1 || !is_letter(tokens[0][0])) break;
      tokens[0] = std::string(1, tokens[0][0]) + ".";
      out = join(tokens);
      break;
    }
    case RuleKind::kNameInversion: {
      if (name.find(',') != std::string_view::npos) break;
      auto tokens = split_spaces(name);
      if (tokens.size() < 2) break;
      std::string last = tokens.back();
      tokens.pop_back();
      out = last + ", " + join(tokens);
      break;
    }
    case RuleKind::kCaseChange:
      // Normalization folds case, so there is nothing to generate here.
      break;
    case RuleKind::kSingleTypo:
      out = apply_typo(rule.typo, name, rng);
      break;
    case RuleKind::kDiacriticStrip:
      out = normalized(name);
      break;
  }
  if (out && *out == name) out.reset();
  return out;
}

std::string elect_canonical(const std::map<std::string, std::string>& names_by_source,
                            const std::set<std::string>& wiki_matches) {
  if (names_by_source.empty()) throw ValidationError("elect_canonical: no source names");
  std::map<std::string, int> votes;
  for (const auto& [source, name] : names_by_source) ++votes[name];
  const std::string* wiki = nullptr;
  int wiki_count = 0;
  for (const auto& [name, count] : votes) {
    if (wiki_matches.count(name)) {
      wiki = &name;
      ++wiki_count;
    }
  }
  if (wiki_count == 1) return *wiki;
  const std::string* best = nullptr;
  int best_votes = 0;
  // Map iteration is lexicographic, so strict comparisons keep the smaller
  // name on a full tie.
  for (const auto& [name, count] : votes) {
    if (!best || count > best_votes || (count == best_votes && name.size() > best->size())) {
      best = &name;
      best_votes = count;
    }
  }
  return *best;
}

std::vector<NameEntity> build_entities_from_matches(const std::vector<BookRecord>& records,
                                                    const MatchTable& matches,
                                                    const std::set<std::string>& wiki_names) {
  std::vector<NameEntity> out;
  for (const auto& record : records) {
    const auto isbn = record_isbn(record);
    if (!isbn) continue;
    const auto it = matches.find(isbn->canonical13());
    if (it == matches.end()) continue;
    std::map<std::string, std::string> by_source;
    for (const auto& answer : it->second) {
      if (answer.status == AnswerStatus::kFound) {
        by_source[std::string(slug(answer.source))] = answer.author_names.front();
      }
    }
    if (by_source.empty()) continue;
    NameEntity entity(elect_canonical(by_source, wiki_names), Provenance::kIsbnMatch);
    for (const auto& [source, name] : by_source) entity.add({name, Provenance::kIsbnMatch, {}, {}});
    const auto catalog = normalized(effective_author(record));
    if (!catalog.empty()) entity.add({catalog, Provenance::kIsbnMatch, {}, {}});
    out.push_back(std::move(entity));
  }
  return merge_entities(out);
}

std::vector<NameEntity> build_entities_fuzzy(const std::vector<BookRecord>& records,
                                             const std::vector<std::string>& reference_names,
                                             std::vector<std::string>* ambiguous) {
  std::set<std::string> catalog_names;
  for (const auto& r : records) {
    auto n = normalized(effective_author(r));
    if (!n.empty()) catalog_names.insert(std::move(n));
  }
  std::vector<std::string> refs;
  for (const auto& r : reference_names) {
    auto n = normalized(r);
    if (!n.empty()) refs.push_back(std::move(n));
  }
  std::sort(refs.begin(), refs.end());
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  std::vector<std::vector<std::string>> ref_tokens;
  for (const auto& r : refs) ref_tokens.push_back(tokenize(r));

  std::map<std::string, NameEntity> by_ref;
  for (const auto& name : catalog_names) {
    const auto tokens = tokenize(name);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (fuzzy_token_match(name, refs[i])) hits.push_back(i);
    }
    if (hits.empty()) continue;
    std::size_t chosen = hits.front();
    if (hits.size() > 1) {
      std::vector<int> exact(hits.size(), 0);
      for (std::size_t h = 0; h < hits.size(); ++h) {
        for (const auto& t : tokens) {
          const auto& rt = ref_tokens[hits[h]];
          if (std::find(rt.begin(), rt.end(), t) != rt.end()) ++exact[h];
        }
      }
      const int top = *std::max_element(exact.begin(), exact.end());
      std::vector<std::size_t> best;
      for (std::size_t h = 0; h < hits.size(); ++h) {
        if (exact[h] == top) best.push_back(hits[h]);
      }
      if (best.size() > 1) {
        if (ambiguous) {
          std::string line = "ambiguous: \"" + name + "\" ties";
          for (std::size_t b : best) line += " \"" + refs[b] + "\"";
          ambiguous->push_back(std::move(line));
        }
        continue;
      }
      chosen = best.front();
    }
    auto [it, inserted] = by_ref.try_emplace(refs[chosen], refs[chosen], Provenance::kFuzzyMatch);
    it->second.add({name, Provenance::kFuzzyMatch, {}, {}});
  }
  std::vector<NameEntity> out;
  for (auto& [ref, entity] : by_ref) out.push_back(std::move(entity));
  return merge_entities(out);
}

std::vector<NameEntity> merge_entities(const std::vector<NameEntity>& entities) {
  std::map<std::string, std::map<std::string, Variant>> grouped;
  for (const auto& e : entities) {
    auto& slot = grouped[e.canonical()];
    for (const auto& v : e.variants()) {
      auto [it, inserted] = slot.try_emplace(v.text, v);
      if (!inserted && variant_key(v) < variant_key(it->second)) it->second = v;
    }
  }
  std::vector<NameEntity> out;
  out.reserve(grouped.size());
  for (auto& [canonical, variants] : grouped) {
    const Variant& head = variants.at(canonical);
    NameEntity merged(canonical, head.provenance);
    for (auto& [text, v] : variants) {
      if (text != canonical) merged.add(v);
    }
    out.push_back(std::move(merged));
  }
  return out;
}

std::vector<NameEntity> augment(const std::vector<NameEntity>& entities,
                                const std::vector<VariantRule>& rules, std::uint64_t seed,
                                AugmentReport* report) {
  std::vector<NameEntity> out;
  out.reserve(entities.size());
  for (const auto& e : entities) {
    NameEntity grown = e;
    for (const auto& v : e.variants()) {
      if (v.provenance == Provenance::kSynthetic) continue;
      for (const auto& rule : rules) {
        const std::string id = rule.id();
        Rng rng(derive_seed(seed, "augment|" + id + "|" + v.text));
        const auto made = apply_rule(rule, v.text, rng);
        if (!made) {
          if (report) ++report->no_op[id];
          continue;
        }
        const bool added = grown.add({*made, Provenance::kSynthetic, id, v.text});
        if (report) ++(added ? report->added : report->present)[id];
      }
    }
    out.push_back(std::move(grown));
  }
  return out;
}

std::pair<std::vector<NameEntity>, std::vector<NameEntity>> split(
    const std::vector<NameEntity>& entities, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split: ratio must be in (0, 1)");
  std::vector<std::size_t> order(entities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "dataset.split"));
  rng.shuffle(order);
  const auto first = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(entities.size())));
  std::vector<bool> in_first(entities.size(), false);
  for (std::size_t i = 0; i < first; ++i) in_first[order[i]] = true;
  std::pair<std::vector<NameEntity>, std::vector<NameEntity>> out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    (in_first[i] ? out.first : out.second).push_back(entities[i]);
  }
  return out;
}

std::map<std::string, std::size_t> variant_census(const std::vector<NameEntity>& entities) {
  std::map<std::string, std::size_t> out;
  for (const auto& e : entities) {
    for (const auto& v : e.variants()) {
      ++out[std::string(to_string(v.provenance))];
      if (v.provenance == Provenance::kSynthetic) ++out["synthetic:" + v.rule];
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> correction_pairs(
    const std::vector<NameEntity>& entities, bool include_canonical) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entities) {
    for (const auto& v : e.variants()) {
      if (v.text != e.canonical() || include_canonical) out.emplace_back(v.text, e.canonical());
    }
  }
  return out;
}

std::vector<std::string> load_reference_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto n = normalized(line);
    if (!n.empty()) out.push_back(std::move(n));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return out;
}

}  // namespace authnorm
