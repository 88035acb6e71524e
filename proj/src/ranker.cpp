#include "authnorm/ranker.hpp"

#include <algorithm>
#include <cmath>

#include "authnorm/error.hpp"
#include "authnorm/rng.hpp"

namespace authnorm {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool contains(const std::vector<std::string>* list, const std::string& s) {
  return list && std::find(list->begin(), list->end(), s) != list->end();
}

}  // namespace

FeatureVector extract_features(const std::string& candidate, const CandidateContext& context) {
  FeatureVector f{};
  if (context.sources) {
    for (const auto& answer : *context.sources) {
      if (answer.status != AnswerStatus::kFound) continue;
      const auto& names = answer.author_names;
      if (std::find(names.begin(), names.end(), candidate) != names.end()) {
        f[source_index(answer.source)] = 1.0;
      }
    }
  }
  f[8] = candidate == context.input ? 1.0 : 0.0;
  f[9] = contains(context.seq2seq_top, candidate) ? 1.0 : 0.0;
  if (context.siamese_matches) {
    for (const auto& m : *context.siamese_matches) {
      if (m.canonical == candidate) f[10] = 1.0;
    }
  }
  if (context.siamese) {
    const nn::RowVector input_repr =
        context.input_repr.size() ? context.input_repr : context.siamese->encode(context.input);
    const nn::RowVector cand = context.siamese->encode(candidate);
    // Cosine distance of identical vectors can round to a tiny negative.
    f[11] = std::max(0.0, 1.0 - nn::cosine_similarity(input_repr, cand, nullptr, nullptr));
  }
  return f;
}

OriginFlags origin_of(const FeatureVector& features) {
  OriginFlags o;
  for (std::size_t s = 0; s < kSourceCount; ++s) o.sources[s] = features[s] != 0.0;
  o.input = features[8] != 0.0;
  o.seq2seq = features[9] != 0.0;
  o.siamese = features[10] != 0.0;
  return o;
}

std::vector<RankerSample> oversample(const std::vector<RankerSample>& samples, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < samples.size(); ++i) (samples[i].label ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw ValidationError("oversample: both classes are required");
  const auto& minority = pos.size() < neg.size() ? pos : neg;
  const std::size_t deficit = std::max(pos.size(), neg.size()) - minority.size();
  Rng rng(derive_seed(seed, "ranker.oversample"));
  std::vector<RankerSample> out = samples;
  out.reserve(samples.size() + deficit);
  for (std::size_t i = 0; i < deficit; ++i) out.push_back(samples[rng.pick(minority)]);
  return out;
}

double LogisticModel::probability(const FeatureVector& x) const {
  double z = bias;
  for (std::size_t i = 0; i < kFeatureCount; ++i) z += weights[i] * x[i];
  return sigmoid(z);
}

nn::ModelContainer LogisticModel::to_container() const {
  nn::ModelContainer c;
  c.kind = kKind;
  c.hyper["features"] = std::to_string(kFeatureCount);
  nn::Tensor w({kFeatureCount});
  for (std::size_t i = 0; i < kFeatureCount; ++i) w[i] = weights[i];
  nn::Tensor b({1}, bias);
  c.tensors.emplace_back("ranker.weights", std::move(w));
  c.tensors.emplace_back("ranker.bias", std::move(b));
  return c;
}

LogisticModel LogisticModel::from_container(const nn::ModelContainer& c) {
  if (c.kind != kKind) throw FormatError("expected a ranker container, found " + c.kind);
  if (c.require("features") != std::to_string(kFeatureCount)) {
    throw FormatError("ranker container: unexpected feature count");
  }
  LogisticModel m;
  bool have_w = false, have_b = false;
  for (const auto& [name, t] : c.tensors) {
    if (name == "ranker.weights" && t.size() == kFeatureCount) {
      for (std::size_t i = 0; i < kFeatureCount; ++i) m.weights[i] = t[i];
      have_w = true;
    } else if (name == "ranker.bias" && t.size() == 1) {
      m.bias = t[0];
      have_b = true;
    }
  }
  if (!have_w || !have_b) throw FormatError("ranker container: missing or malformed tensors");
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw FormatError("ranker container: non-finite weight");
  }
  if (!std::isfinite(m.bias)) throw FormatError("ranker container: non-finite bias");
  return m;
}

LogisticModel LogisticModel::load(const std::filesystem::path& path) {
  return from_container(nn::ModelContainer::load(path, kKind));
}

LogisticModel train_logreg(const std::vector<RankerSample>& samples, const LogRegConfig& config) {
  std::size_t positives = 0;
  for (const auto& s : samples) positives += s.label ? 1 : 0;
  if (samples.size() < 2 || positives == 0 || positives == samples.size()) {
    throw ValidationError("train_logreg: need samples of both classes");
  }
  const double n = static_cast<double>(samples.size());
  LogisticModel m;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::array<double, kFeatureCount> gw{};
    double gb = 0.0;
    for (const auto& s : samples) {
      const double err = m.probability(s.features) - (s.label ? 1.0 : 0.0);
      for (std::size_t i = 0; i < kFeatureCount; ++i) gw[i] += err * s.features[i];
      gb += err;
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) m.weights[i] -= config.learning_rate * gw[i] / n;
    m.bias -= config.learning_rate * gb / n;
  }
  double loss = 0.0;
  for (const auto& s : samples) {
    double z = m.bias;
    for (std::size_t i = 0; i < kFeatureCount; ++i) z += m.weights[i] * s.features[i];
    // log(1 + exp(-y z)) with y in {-1, +1}, computed stably.
    const double yz = s.label ? z : -z;
    loss += yz > 0 ? std::log1p(std::exp(-yz)) : -yz + std::log1p(std::exp(yz));
  }
  m.final_loss = loss / n;
  if (!std::isfinite(m.final_loss)) throw NumericError("train_logreg: non-finite loss");
  return m;
}

double score(const LogisticModel& model, const FeatureVector& x) { return model.probability(x); }

void rank(std::vector<Proposal>& proposals) {
  for (const auto& p : proposals) {
    if (!p.score) throw ValidationError("rank: unscored proposal \"" + p.candidate + "\"");
  }
  std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    if (*a.score != *b.score) return *a.score > *b.score;
    const int sa = a.origin.source_count(), sb = b.origin.source_count();
    if (sa != sb) return sa > sb;
    return a.candidate < b.candidate;
  });
}

ClassRecall class_recall(const LogisticModel& model, const std::vector<RankerSample>& samples,
                         double threshold) {
  ClassRecall r;
  std::size_t tp = 0, tn = 0;
  for (const auto& s : samples) {
    const bool predicted = model.probability(s.features) >= threshold;
    if (s.label) {
      ++r.positives;
      tp += predicted ? 1 : 0;
    } else {
      ++r.negatives;
      tn += predicted ? 0 : 1;
    }
  }
  r.positive = r.positives ? static_cast<double>(tp) / static_cast<double>(r.positives) : 0.0;
  r.negative = r.negatives ? static_cast<double>(tn) / static_cast<double>(r.negatives) : 0.0;
  r.accuracy = samples.empty() ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(samples.size());
  return r;
}

}  // namespace authnorm
