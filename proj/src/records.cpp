#include "authnorm/records.hpp"

#include <algorithm>

#include "authnorm/error.hpp"
#include "json.hpp"
#include "jsonl.hpp"

namespace authnorm {

using nlohmann::json;

namespace {

using detail::trim;

std::string require_string(const json& doc, std::size_t line,
                           const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw SchemaError(line, field, "missing");
  if (!it->is_string()) throw SchemaError(line, field, "expected a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& doc, std::size_t line,
                                           const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(line, field, "expected a string");
  return it->get<std::string>();
}

BookRecord book_from_json(const json& doc, std::size_t line) {
  BookRecord r;
  r.isbn = optional_string(doc, line, "isbn");
  r.title = require_string(doc, line, "title");
  if (trim(r.title).empty()) throw SchemaError(line, "title", "empty");
  r.author_raw = optional_string(doc, line, "author_raw").value_or("");
  return r;
}

json book_to_json(const BookRecord& r) {
  json doc = json::object();
  if (r.isbn) doc["isbn"] = *r.isbn;
  doc["title"] = r.title;
  doc["author_raw"] = r.author_raw;
  return doc;
}

NameEntity entity_from_json(const json& doc, std::size_t line) {
  const std::string canonical = require_string(doc, line, "canonical");
  if (canonical.empty()) throw SchemaError(line, "canonical", "empty");
  const auto vit = doc.find("variants");
  if (vit == doc.end()) throw SchemaError(line, "variants", "missing");
  if (!vit->is_array()) throw SchemaError(line, "variants", "expected an array");
  const auto pit = doc.find("provenance");
  if (pit == doc.end()) throw SchemaError(line, "provenance", "missing");
  if (!pit->is_array() || pit->size() != vit->size()) {
    throw SchemaError(line, "provenance",
                      "expected an array parallel to variants");
  }
  const json derived = doc.value("derived", json::object());

  std::vector<Variant> variants;
  for (std::size_t i = 0; i < vit->size(); ++i) {
    const json& v = (*vit)[i];
    const json& p = (*pit)[i];
    if (!v.is_string()) throw SchemaError(line, "variants", "expected strings");
    if (!p.is_string()) throw SchemaError(line, "provenance", "expected strings");
    Variant var;
    var.text = v.get<std::string>();
    try {
      var.provenance = provenance_from_string(p.get<std::string>());
    } catch (const ValidationError& e) {
      throw SchemaError(line, "provenance", e.what());
    }
    if (const auto d = derived.find(var.text); d != derived.end()) {
      var.rule = d->value("rule", "");
      var.derived_from = d->value("from", "");
    }
    for (const auto& seen : variants) {
      if (seen.text == var.text) {
        throw SchemaError(line, "variants", "duplicate variant \"" + var.text + "\"");
      }
    }
    variants.push_back(std::move(var));
  }
  const auto canon = std::find_if(variants.begin(), variants.end(),
                                  [&](const Variant& v) { return v.text == canonical; });
  if (canon == variants.end()) {
    throw SchemaError(line, "canonical", "not among variants");
  }
  NameEntity e(canonical, canon->provenance);
  for (auto& v : variants) {
    if (v.text != canonical) e.add(std::move(v));
  }
  return e;
}

json entity_to_json(const NameEntity& e) {
  json variants = json::array();
  json provenance = json::array();
  json derived = json::object();
  for (const auto& v : e.variants()) {
    variants.push_back(v.text);
    provenance.push_back(std::string(to_string(v.provenance)));
    if (!v.rule.empty()) derived[v.text] = {{"rule", v.rule}, {"from", v.derived_from}};
  }
  json doc = {{"canonical", e.canonical()},
              {"variants", std::move(variants)},
              {"provenance", std::move(provenance)}};
  if (!derived.empty()) doc["derived"] = std::move(derived);
  return doc;
}

AnnotatedBook annotated_from_json(const json& doc, std::size_t line) {
  AnnotatedBook a;
  a.record = book_from_json(doc, line);
  a.ground_truth = require_string(doc, line, "ground_truth");
  if (trim(a.ground_truth).empty()) throw SchemaError(line, "ground_truth", "empty");
  return a;
}

json annotated_to_json(const AnnotatedBook& a) {
  json doc = book_to_json(a.record);
  doc["ground_truth"] = a.ground_truth;
  return doc;
}

template <typename Record, typename Parse>
std::vector<Record> load_lines(const std::filesystem::path& path, Parse parse) {
  std::vector<Record> out;
  detail::for_each_json_line(path, [&](const json& doc, std::size_t line) {
    out.push_back(parse(doc, line));
  });
  return out;
}

template <typename Record, typename Emit>
void write_lines(const std::filesystem::path& path, const std::vector<Record>& records,
                 Emit emit) {
  detail::write_json_lines(path, records, emit);
}

}  // namespace

std::string effective_author(const BookRecord& record) {
  return trim(record.author_raw) == kUnknownAuthor ? std::string{} : record.author_raw;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kIsbnMatch: return "isbn-match";
    case Provenance::kFuzzyMatch: return "fuzzy-match";
    case Provenance::kNameVariantList: return "name-variant-list";
    case Provenance::kSynthetic: return "synthetic";
  }
  return "synthetic";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "isbn-match") return Provenance::kIsbnMatch;
  if (s == "fuzzy-match") return Provenance::kFuzzyMatch;
  if (s == "name-variant-list") return Provenance::kNameVariantList;
  if (s == "synthetic") return Provenance::kSynthetic;
  throw ValidationError("unknown provenance tag \"" + std::string(s) + "\"");
}

NameEntity::NameEntity(std::string canonical, Provenance provenance)
    : canonical_(std::move(canonical)) {
  variants_.push_back(Variant{canonical_, provenance, {}, {}});
}

bool NameEntity::contains(std::string_view text) const {
  return std::any_of(variants_.begin(), variants_.end(),
                     [&](const Variant& v) { return v.text == text; });
}

bool NameEntity::add(Variant v) {
  if (v.text.empty() || contains(v.text)) return false;
  variants_.push_back(std::move(v));
  return true;
}

std::vector<std::string> NameEntity::texts() const {
  std::vector<std::string> out;
  out.reserve(variants_.size());
  for (const auto& v : variants_) out.push_back(v.text);
  return out;
}

int OriginFlags::source_count() const {
  return static_cast<int>(std::count(sources.begin(), sources.end(), true));
}

std::vector<BookRecord> load_books(const std::filesystem::path& path) {
  return load_lines<BookRecord>(path, book_from_json);
}

std::vector<NameEntity> load_entities(const std::filesystem::path& path) {
  return load_lines<NameEntity>(path, entity_from_json);
}

std::vector<AnnotatedBook> load_annotated(const std::filesystem::path& path) {
  return load_lines<AnnotatedBook>(path, annotated_from_json);
}

void write_books(const std::filesystem::path& path,
                 const std::vector<BookRecord>& records) {
  write_lines(path, records, book_to_json);
}

void write_entities(const std::filesystem::path& path,
                    const std::vector<NameEntity>& entities) {
  write_lines(path, entities, entity_to_json);
}

void write_annotated(const std::filesystem::path& path,
                     const std::vector<AnnotatedBook>& books) {
  write_lines(path, books, annotated_to_json);
}

}  // namespace authnorm
