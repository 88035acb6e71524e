#include "authnorm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "authnorm/dataset.hpp"
#include "authnorm/error.hpp"
#include "authnorm/isbn.hpp"
#include "authnorm/rng.hpp"
#include "authnorm/textnorm.hpp"

namespace authnorm {

namespace {

// Given names and surnames in display form. Surnames are drawn with a
// skewed distribution so that many authors share one.
const std::vector<std::string>& given_names() {
  static const std::vector<std::string> kNames{
      "Émile", "Honoré", "Victor", "Gustave", "Marcel", "Albert", "Jules", "Alexandre", "George",
      "Marguerite", "Simone", "Colette", "Françoise", "Annie", "Amélie", "Jean", "Jean-Paul",
      "Jean-Marie", "Louis", "Anatole", "Guy", "Prosper", "Théophile", "Paul",
      "Arthur", "Charles", "Charlotte", "Emily", "Anne", "Jane", "Virginia", "Agatha", "Dorothy",
      "Francis", "Scott", "Ernest", "William", "Henry", "Herman", "Mark", "Edgar", "Stephen",
      "John", "Joan", "Joanne", "Ray", "Isaac", "Ursula", "Philip", "Patricia", "Fyodor", "Lev",
      "Anton", "Nikolai", "Mikhail", "Vladimir", "Boris", "Gabriel", "Jorge", "Julio", "Isabel",
      "Mario", "Pablo", "Federico", "Miguel", "Umberto", "Italo", "Elena", "Primo", "Dante",
      "Günter", "Thomas", "Heinrich", "Hermann", "Stefan", "Franz", "Rainer", "Bertolt", "Erich",
      "Haruki", "Yukio", "Kenzaburō", "Selma", "Astrid", "Henrik", "Knut", "Søren", "Milan",
      "Václav", "Bohumil", "Wisława", "Czesław", "Andrzej", "Orhan", "Naguib", "Chinua", "Wole",
      "Toni", "Maya", "Zadie", "Salman", "Arundhati", "Kazuo", "Margaret", "Alice", "Doris",
      "Nadine", "Svetlana", "Olga", "Joseph", "Michel", "Pierre", "Jacques", "René", "Romain",
      "Raymond", "Boris", "Hervé", "Amin", "Tahar", "Leïla", "Yasmina", "Marie", "Annie",
      "Delphine", "Fred", "Muriel", "Katherine", "Daphne", "Edith", "Sylvia", "Elsa", "Mathias",
      "Benoît", "Clément", "Noémie", "Anaïs", "Chloé", "Zoé", "Léa", "Inès", "Raphaël", "Loïc"};
  return kNames;
}

const std::vector<std::string>& surnames() {
  static const std::vector<std::string> kNames{
      "Martin", "Bernard", "Dubois", "Durand", "Lefèvre", "Moreau", "Laurent", "Simon", "Michel",
      "Garcia", "Roux", "Fournier", "Girard", "Bonnet", "Dupont", "Lambert", "Fontaine", "Rousseau",
      "Vincent", "Müller", "Schmidt", "Schneider", "Fischer", "Weber", "Wagner", "Becker", "Hoffmann",
      "Smith", "Johnson", "Williams", "Brown", "Jones", "Miller", "Davis", "Wilson", "Taylor",
      "Anderson", "Thomas", "Moore", "Jackson", "White", "Harris", "Clark", "Lewis", "Walker",
      "Hall", "Young", "King", "Wright", "Hill", "Scott", "Green", "Baker", "Adams", "Nelson",
      "Zola", "Balzac", "Hugo", "Flaubert", "Proust", "Camus", "Verne", "Dumas", "Sand", "Duras",
      "Beauvoir", "Sagan", "Ernaux", "Nothomb", "Sartre", "Le Clézio", "Maupassant", "Mérimée",
      "Gautier", "Valéry", "Rimbaud", "Baudelaire", "Brontë", "Austen", "Woolf", "Christie",
      "Sayers", "Fitzgerald", "Hemingway", "Faulkner", "James", "Melville", "Twain", "Poe",
      "King", "Tolkien", "Rowling", "Bradbury", "Asimov", "Le Guin", "Dick", "Highsmith",
      "Dostoïevski", "Tolstoï", "Tchekhov", "Gogol", "Boulgakov", "Nabokov", "Pasternak",
      "García Márquez", "Borges", "Cortázar", "Allende", "Vargas Llosa", "Neruda", "Lorca",
      "Cervantes", "Eco", "Calvino", "Ferrante", "Levi", "Alighieri", "Grass", "Mann", "Böll",
      "Hesse", "Zweig", "Kafka", "Rilke", "Brecht", "Kästner", "Murakami", "Mishima", "Ōe",
      "Lagerlöf", "Lindgren", "Ibsen", "Hamsun", "Kierkegaard", "Kundera", "Havel", "Hrabal",
      "Szymborska", "Miłosz", "Sapkowski", "Pamuk", "Mahfouz", "Achebe", "Soyinka", "Morrison",
      "Angelou", "Smith", "Rushdie", "Roy", "Ishiguro", "Atwood", "Munro", "Lessing", "Gordimer",
      "Alexievitch", "Tokarczuk", "Conrad", "Houellebecq", "Modiano", "Quignard", "Échenoz",
      "Gary", "Queneau", "Perec", "Vian", "Le Tellier", "Maalouf", "Ben Jelloun", "Slimani",
      "Khadra", "Vigan", "Vargas", "Barbery", "Mansfield", "Du Maurier", "Wharton", "Plath",
      "Triolet", "Énard", "Carrère", "Daoud", "Despentes", "Darrieussecq", "Ndiaye", "Lévy",
      "Musso", "Pancol", "Gavalda", "Chalandon", "Jardin", "Dicker", "Tesson", "Bussi", "Thilliez",
      "Grangé", "Chattam", "Minier", "Lemaitre", "Ferrari", "Mauvignier", "Garréta", "Kerangal",
      "Desplechin", "Bobin", "Sallenave", "Huston", "Chevillard", "Volodine", "Toussaint",
      "Rolin", "Bon", "Jaenada", "Reinhardt", "Enard", "Haenel", "Mathieu", "Petit", "Robert",
      "Richard", "Durieux", "Morel", "Girardin", "André", "Mercier", "Blanc", "Guérin", "Boyer",
      "Garnier", "Chevalier", "François", "Legrand", "Gauthier", "Perrin", "Robin", "Clément",
      "Morin", "Nicolas", "Henry", "Roussel", "Mathis", "Gaillard", "Brunet", "Schmitt", "Faure"};
  return kNames;
}

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

std::string upper_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

std::string title_ascii(std::string s) {
  bool start = true;
  for (char& c : s) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = (c == ' ' || c == '-' || c == '\'');
  }
  return s;
}

std::size_t skewed_index(Rng& rng, std::size_t n, double exponent) {
  // Inverse-CDF draw from weights 1/(i+1)^exponent.
  std::vector<double> cdf(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    cdf[i] = sum;
  }
  const double u = rng.uniform() * sum;
  return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()) % n;
}

struct Composition {
  std::vector<RuleKind> rules;
  int weight;
};

const std::vector<Composition>& compositions() {
  static const std::vector<Composition> kAll{
      {{RuleKind::kInitialAbbreviation}, 3},
      {{RuleKind::kNameInversion}, 2},
      {{RuleKind::kSingleTypo}, 3},
      {{RuleKind::kInitialAbbreviation, RuleKind::kNameInversion}, 3},
      {{RuleKind::kNameInversion, RuleKind::kSingleTypo}, 2},
      {{RuleKind::kInitialAbbreviation, RuleKind::kSingleTypo}, 2},
      {{RuleKind::kInitialAbbreviation, RuleKind::kNameInversion, RuleKind::kSingleTypo}, 2},
      {{RuleKind::kSingleTypo, RuleKind::kSingleTypo}, 1},
  };
  return kAll;
}

const Composition& pick_composition(Rng& rng) {
  int total = 0;
  for (const auto& c : compositions()) total += c.weight;
  auto r = static_cast<int>(rng.below(static_cast<std::size_t>(total)));
  for (const auto& c : compositions()) {
    if (r < c.weight) return c;
    r -= c.weight;
  }
  return compositions().front();
}

// Display form of a normalized variant, restoring the author's own
// spelling where a token is recognized, with occasional case and
// diacritic changes.
std::string render(const SynthAuthor& author, std::string_view variant, Rng& rng) {
  const bool strip = rng.bernoulli(0.15);
  std::string out;
  for (const auto& token : split_spaces(variant)) {
    std::string core = token;
    std::string tail;
    while (!core.empty() && (core.back() == ',' || core.back() == '.')) {
      tail.insert(tail.begin(), core.back());
      core.pop_back();
    }
    std::string shown;
    const auto it = author.raw_tokens.find(core);
    if (it != author.raw_tokens.end() && !strip) {
      shown = it->second;
    } else {
      shown = title_ascii(core);
    }
    if (!out.empty()) out.push_back(' ');
    out += shown + tail;
  }
  const double u = rng.uniform();
  if (u < 0.06) return upper_ascii(out);
  if (u < 0.10) return normalized(out);
  return out;
}

SynthAuthor make_author(Rng& rng, std::set<std::string>& taken) {
  const auto& given = given_names();
  const auto& family = surnames();
  for (;;) {
    std::vector<std::string> parts{given[rng.below(given.size())]};
    if (rng.bernoulli(0.2)) {
      auto middle = given[rng.below(given.size())];
      if (middle != parts[0]) parts.push_back(middle);
    }
    parts.push_back(family[skewed_index(rng, family.size(), 0.7)]);
    if (rng.bernoulli(0.03)) parts.erase(parts.begin(), parts.end() - 1);
    std::string display;
    for (const auto& p : parts) display += (display.empty() ? "" : " ") + p;
    const auto key = normalized(display);
    if (!taken.insert(key).second) continue;
    SynthAuthor a;
    a.display = display;
    for (const auto& p : parts) {
      const auto norm_tokens = split_spaces(normalized(p));
      const auto raw_tokens = split_spaces(p);
      if (norm_tokens.size() != raw_tokens.size()) continue;
      for (std::size_t i = 0; i < raw_tokens.size(); ++i) a.raw_tokens[norm_tokens[i]] = raw_tokens[i];
    }
    return a;
  }
}

NameEntity make_entity(const SynthAuthor& author, const SynthConfig& config, Rng& rng) {
  const auto canonical = normalized(author.display);
  NameEntity e(canonical, Provenance::kSynthetic);
  const std::size_t target =
      config.min_variants + rng.below(config.max_variants - config.min_variants + 1);
  std::size_t made = 0;
  for (std::size_t attempt = 0; attempt < 6 * target && made < target; ++attempt) {
    const auto& comp = pick_composition(rng);
    std::string text = canonical;
    std::string rule;
    bool ok = true;
    for (RuleKind kind : comp.rules) {
      const VariantRule r{kind, TypoKind::kAny};
      const auto next = apply_rule(r, text, rng);
      if (!next) {
        ok = false;
        break;
      }
      text = *next;
      rule += (rule.empty() ? "" : "+") + r.id();
    }
    if (!ok || text.empty()) continue;
    if (e.add({text, Provenance::kSynthetic, rule, canonical})) ++made;
  }
  return e;
}

std::string make_isbn(Rng& rng, std::set<std::string>& used, bool& as_isbn10) {
  for (;;) {
    const bool prefix979 = rng.bernoulli(0.1);
    std::string digits = prefix979 ? "979" : "978";
    while (digits.size() < 12) digits.push_back(static_cast<char>('0' + rng.below(10)));
    digits.push_back(isbn13_check_char(digits));
    if (!used.insert(digits).second) continue;
    as_isbn10 = !prefix979 && rng.bernoulli(0.3);
    if (as_isbn10) {
      std::string ten = digits.substr(3, 9);
      ten.push_back(isbn10_check_char(ten));
      if (rng.bernoulli(0.5)) {
        return ten.substr(0, 1) + "-" + ten.substr(1, 4) + "-" + ten.substr(5, 4) + "-" + ten.substr(9);
      }
      return ten;
    }
    return digits;
  }
}

std::string corrupt_check_digit(std::string isbn) {
  char& last = isbn.back();
  last = last == '9' || last == 'X' ? '0' : static_cast<char>(last + 1);
  return isbn;
}

struct SourceStyle {
  double coverage;
  double inverted;     // "Surname, Given"
  double abbreviated;  // "G. Surname"
  double typo;
};

// Frozen source order; library catalogs prefer inverted headings.
constexpr std::array<SourceStyle, kSourceCount> kStyles{{
    {0.25, 0.10, 0.05, 0.03},  // OpenLibrary
    {0.20, 0.30, 0.05, 0.05},  // ISBNdb
    {0.30, 0.00, 0.08, 0.03},  // Goodreads
    {0.25, 0.00, 0.10, 0.02},  // GoogleBooks
    {0.15, 0.80, 0.05, 0.01},  // OCLC
    {0.12, 0.85, 0.03, 0.01},  // BnF
    {0.10, 0.85, 0.03, 0.01},  // Sudoc
    {0.08, 0.00, 0.02, 0.05},  // Babelio
}};

std::string inverted_display(const std::string& display) {
  auto tokens = split_spaces(display);
  if (tokens.size() < 2) return display;
  std::string out = tokens.back() + ",";
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out += " " + tokens[i];
  return out;
}

std::string source_display(const SynthAuthor& author, const SourceStyle& style, Rng& rng) {
  const double u = rng.uniform();
  const auto canonical = normalized(author.display);
  if (u < style.inverted) return inverted_display(author.display);
  if (u < style.inverted + style.abbreviated) {
    if (auto v = apply_rule({RuleKind::kInitialAbbreviation}, canonical, rng)) {
      return render(author, *v, rng);
    }
  } else if (u < style.inverted + style.abbreviated + style.typo) {
    if (auto v = apply_rule({RuleKind::kSingleTypo}, canonical, rng)) return render(author, *v, rng);
  }
  return author.display;
}

struct BookDraft {
  BookRecord record;
  std::size_t author = 0;
};

}  // namespace

SynthWorld generate_world(const SynthConfig& config) {
  if (config.entities < 2) throw ValidationError("synth: need at least 2 entities");
  if (config.max_variants < config.min_variants) throw ValidationError("synth: bad variant range");
  SynthWorld world;
  Rng name_rng(derive_seed(config.seed, "synth.names"));
  std::set<std::string> taken;
  for (std::size_t i = 0; i < config.entities; ++i) world.authors.push_back(make_author(name_rng, taken));

  Rng variant_rng(derive_seed(config.seed, "synth.variants"));
  for (const auto& a : world.authors) world.corpus.push_back(make_entity(a, config, variant_rng));

  // Book counts per author are skewed: a few prolific authors, a long tail.
  std::vector<std::size_t> popularity(config.entities);
  for (std::size_t i = 0; i < popularity.size(); ++i) popularity[i] = i;
  Rng pop_rng(derive_seed(config.seed, "synth.popularity"));
  pop_rng.shuffle(popularity);

  std::set<std::string> used_isbns;
  auto make_books = [&](std::size_t count, std::string_view label) {
    Rng rng(derive_seed(config.seed, label));
    std::vector<BookDraft> out;
    for (std::size_t b = 0; b < count; ++b) {
      BookDraft d;
      d.author = popularity[skewed_index(rng, config.entities, 0.5)];
      const auto& author = world.authors[d.author];
      const auto& entity = world.corpus[d.author];
      if (rng.bernoulli(0.03)) {
        d.record.author_raw = std::string(kUnknownAuthor);
      } else if (rng.bernoulli(0.45) || entity.variants().size() < 2) {
        d.record.author_raw = render(author, entity.canonical(), rng);
      } else {
        const auto& v = entity.variants()[1 + rng.below(entity.variants().size() - 1)];
        d.record.author_raw = render(author, v.text, rng);
      }
      d.record.title = std::string(label.substr(label.find('.') + 1)) + " volume " + std::to_string(b + 1);
      if (rng.bernoulli(config.isbn_rate)) {
        bool ten = false;
        auto isbn = make_isbn(rng, used_isbns, ten);
        if (rng.bernoulli(0.02)) isbn = corrupt_check_digit(isbn);
        d.record.isbn = isbn;
      }
      out.push_back(std::move(d));
    }
    return out;
  };
  const auto catalog = make_books(config.catalog_books, "synth.catalog");
  const auto annotated = make_books(config.annotated_books, "synth.annotated");

  std::array<std::map<std::string, FixtureSource::Entry>, kSourceCount> tables;
  Rng source_rng(derive_seed(config.seed, "synth.sources"));
  auto publish = [&](const BookDraft& d) {
    const auto isbn = record_isbn(d.record);
    if (!isbn) return;
    const auto& author = world.authors[d.author];
    for (std::size_t s = 0; s < kSourceCount; ++s) {
      const auto& style = kStyles[s];
      if (!source_rng.bernoulli(style.coverage)) continue;
      FixtureSource::Entry entry;
      if (source_rng.bernoulli(0.01)) {
        entry.unavailable = true;
      } else {
        entry.authors.push_back(source_display(author, style, source_rng));
        if (source_rng.bernoulli(0.03)) {
          entry.authors.push_back(world.authors[source_rng.below(config.entities)].display);
        }
      }
      tables[s].emplace(isbn->canonical13(), std::move(entry));
    }
  };
  for (const auto& d : catalog) {
    publish(d);
    world.catalog.push_back(d.record);
  }
  for (const auto& d : annotated) {
    publish(d);
    world.annotated.push_back({d.record, world.corpus[d.author].canonical()});
  }
  for (SourceId id : all_sources()) {
    world.sources.emplace_back(id, std::move(tables[source_index(id)]));
  }

  Rng ref_rng(derive_seed(config.seed, "synth.reference"));
  for (const auto& a : world.authors) {
    if (ref_rng.bernoulli(config.reference_rate)) world.reference_names.push_back(a.display);
  }
  Rng list_rng(derive_seed(config.seed, "synth.variant_list"));
  for (const auto& e : world.corpus) {
    if (!list_rng.bernoulli(config.variant_list_rate)) continue;
    NameEntity listed(e.canonical(), Provenance::kNameVariantList);
    const std::size_t extra = 2 + list_rng.below(3);
    for (std::size_t k = 0; k < extra && e.variants().size() > 1; ++k) {
      const auto& v = e.variants()[1 + list_rng.below(e.variants().size() - 1)];
      listed.add({v.text, Provenance::kNameVariantList, {}, {}});
    }
    world.variant_list.push_back(std::move(listed));
  }
  return world;
}

void write_world(const SynthWorld& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "sources");
  write_entities(dir / "corpus.jsonl", world.corpus);
  write_books(dir / "catalog.jsonl", world.catalog);
  write_annotated(dir / "annotated.jsonl", world.annotated);
  write_entities(dir / "variant_list.jsonl", world.variant_list);
  for (const auto& s : world.sources) s.save(dir / "sources");
  std::ofstream ref(dir / "reference.txt", std::ios::binary | std::ios::trunc);
  if (!ref) throw IoError("cannot open " + (dir / "reference.txt").string() + " for writing");
  for (const auto& name : world.reference_names) ref << name << '\n';
  if (!ref) throw IoError("write failure on " + (dir / "reference.txt").string());
}

}  // namespace authnorm
