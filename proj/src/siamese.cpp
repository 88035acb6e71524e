#include "authnorm/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "authnorm/error.hpp"
#include "authnorm/nn/optim.hpp"
#include "authnorm/rng.hpp"

namespace authnorm {

using nn::Matrix;
using nn::RowVector;

SiameseModel::SiameseModel(SiameseShape shape, std::uint64_t seed)
    : shape_(shape),
      embedding_("siamese.embedding", {static_cast<std::size_t>(alphabet::kSize), shape.embed_dim}),
      encoder_("siamese.encoder", shape.embed_dim, shape.hidden),
      projection_("siamese.projection", 2 * shape.hidden, shape.repr_dim) {
  Rng rng(derive_seed(seed, "siamese.init"));
  init_uniform(embedding_.value, shape.embed_dim, rng);
  encoder_.init(rng);
  projection_.init(rng);
}

nn::ParameterList SiameseModel::parameters() {
  nn::ParameterList out{&embedding_};
  for (auto* p : encoder_.parameters()) out.push_back(p);
  for (auto* p : projection_.parameters()) out.push_back(p);
  return out;
}

Matrix SiameseModel::encode_batch(std::span<const CharSequence> seqs, Cache* cache) const {
  if (cache) {
    cache->tokens = nn::TokenBatch::from_sequences(seqs);
    cache->embedded = nn::embedding_forward(cache->tokens, embedding_.value);
    auto out = nn::bilstm_forward(cache->embedded, encoder_, &cache->encoder, false);
    cache->pooled = std::move(out.h_final);
    return nn::dense_forward(cache->pooled, projection_);
  }
  const auto tokens = nn::TokenBatch::from_sequences(seqs);
  const auto embedded = nn::embedding_forward(tokens, embedding_.value);
  const auto out = nn::bilstm_forward(embedded, encoder_, nullptr, false);
  return nn::dense_forward(out.h_final, projection_);
}

void SiameseModel::backward(const Cache& cache, const Matrix& d_repr) {
  const Matrix d_pooled = nn::dense_backward(cache.pooled, d_repr, projection_);
  const Matrix zero = Matrix::Zero(d_pooled.rows(), d_pooled.cols());
  const auto dx = nn::bilstm_backward(cache.encoder, encoder_, nullptr, d_pooled, zero);
  nn::embedding_backward(cache.tokens, dx, embedding_.grad);
}

RowVector SiameseModel::encode(std::string_view text) const {
  const CharSequence seq = authnorm::encode(text);
  return encode_batch(std::span<const CharSequence>(&seq, 1), nullptr).row(0);
}

std::vector<RowVector> SiameseModel::encode_all(std::span<const std::string> texts) const {
  constexpr std::size_t kChunk = 256;
  std::vector<RowVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += kChunk) {
    std::vector<CharSequence> seqs;
    for (std::size_t i = start; i < std::min(texts.size(), start + kChunk); ++i) {
      seqs.push_back(authnorm::encode(texts[i]));
    }
    const Matrix reps = encode_batch(seqs, nullptr);
    for (Eigen::Index r = 0; r < reps.rows(); ++r) out.emplace_back(reps.row(r));
  }
  return out;
}

nn::ModelContainer SiameseModel::to_container() const {
  nn::ModelContainer c;
  c.kind = kKind;
  c.hyper["embed_dim"] = std::to_string(shape_.embed_dim);
  c.hyper["hidden"] = std::to_string(shape_.hidden);
  c.hyper["repr_dim"] = std::to_string(shape_.repr_dim);
  c.vocab = nn::alphabet_vocab();
  c.put(const_cast<SiameseModel*>(this)->parameters());
  return c;
}

SiameseModel SiameseModel::from_container(const nn::ModelContainer& c) {
  if (c.kind != kKind) throw FormatError("expected a siamese container, found " + c.kind);
  if (c.vocab != nn::alphabet_vocab()) throw FormatError("siamese container alphabet mismatch");
  SiameseShape shape;
  shape.embed_dim = std::stoul(c.require("embed_dim"));
  shape.hidden = std::stoul(c.require("hidden"));
  shape.repr_dim = std::stoul(c.require("repr_dim"));
  SiameseModel model(shape);
  c.take(model.parameters());
  return model;
}

SiameseModel SiameseModel::load(const std::filesystem::path& path) {
  return from_container(nn::ModelContainer::load(path, kKind));
}

RowVector encode_name(const SiameseModel& model, const NormalizedName& name) {
  return model.encode(name.text);
}

std::vector<LabeledPair> sample_pairs(const std::vector<NameEntity>& entities, int ratio,
                                      std::uint64_t seed, std::size_t epoch,
                                      std::size_t positive_cap) {
  if (entities.size() < 2) throw ValidationError("sample_pairs: need at least 2 entities");
  std::vector<LabeledPair> pool;
  Rng cap_rng(derive_seed(seed, "siamese.positives"));
  for (std::size_t e = 0; e < entities.size(); ++e) {
    const auto names = entities[e].texts();
    std::vector<LabeledPair> within;
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (std::size_t j = i + 1; j < names.size(); ++j) {
        within.push_back(LabeledPair{names[i], names[j], 1, e, e});
      }
    }
    if (within.size() > positive_cap) {
      cap_rng.shuffle(within);
      within.resize(positive_cap);
    }
    pool.insert(pool.end(), within.begin(), within.end());
  }
  const std::size_t positives = pool.size();
  Rng rng(derive_seed(seed, "siamese.negatives", epoch));
  for (std::size_t n = 0; n < positives * static_cast<std::size_t>(ratio); ++n) {
    // A surface form shared by two entities cannot serve as a negative.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const std::size_t a = rng.below(entities.size());
      std::size_t b = rng.below(entities.size() - 1);
      if (b >= a) ++b;
      const auto& va = entities[a].variants();
      const auto& vb = entities[b].variants();
      const auto& left = va[rng.below(va.size())].text;
      const auto& right = vb[rng.below(vb.size())].text;
      if (entities[a].contains(right) || entities[b].contains(left)) continue;
      pool.push_back(LabeledPair{left, right, 0, a, b});
      break;
    }
  }
  return pool;
}

double siamese_pair_loss(SiameseModel& model, std::span<const LabeledPair> pairs, double margin,
                         bool accumulate) {
  if (pairs.empty()) return 0.0;
  // Each distinct name is encoded once per batch.
  std::unordered_map<std::string, Eigen::Index> slot;
  std::vector<CharSequence> seqs;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> rows;
  rows.reserve(pairs.size());
  auto slot_of = [&](const std::string& name) {
    const auto [it, inserted] = slot.emplace(name, static_cast<Eigen::Index>(seqs.size()));
    if (inserted) seqs.push_back(encode(name));
    return it->second;
  };
  for (const auto& p : pairs) {
    const auto l = slot_of(p.left);
    const auto r = slot_of(p.right);
    rows.emplace_back(l, r);
  }

  SiameseModel::Cache cache;
  const Matrix reps = model.encode_batch(seqs, accumulate ? &cache : nullptr);
  Matrix d_reps = Matrix::Zero(reps.rows(), reps.cols());
  const double scale = 1.0 / static_cast<double>(pairs.size());
  double total = 0.0;
  RowVector du, dv;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [l, r] = rows[i];
    const double s = nn::cosine_similarity(reps.row(l), reps.row(r), accumulate ? &du : nullptr,
                                           accumulate ? &dv : nullptr);
    const auto lg = nn::contrastive_loss(s, pairs[i].label, margin);
    total += lg.loss;
    if (accumulate && lg.grad != 0.0) {
      d_reps.row(l) += lg.grad * scale * du;
      d_reps.row(r) += lg.grad * scale * dv;
    }
  }
  if (accumulate) model.backward(cache, d_reps);
  return total * scale;
}

SiameseTrainResult train_siamese(const std::vector<NameEntity>& entities,
                                 const SiameseTrainConfig& config, SiameseShape shape,
                                 const EpochCallback& on_epoch) {
  if (entities.empty()) throw ValidationError("train_siamese: no entities");
  if (config.batch_size == 0) throw ValidationError("train_siamese: batch size must be positive");
  SiameseTrainResult result{SiameseModel(shape, config.seed), {}};
  auto params = result.model.parameters();
  nn::AdamState adam(params, nn::AdamConfig{config.learning_rate});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto pool = sample_pairs(entities, config.negative_ratio, config.seed,
                             static_cast<std::size_t>(epoch), config.positive_cap);
    Rng order(derive_seed(config.seed, "siamese.shuffle", static_cast<std::uint64_t>(epoch)));
    order.shuffle(pool);
    double sum = 0.0;
    for (std::size_t start = 0; start < pool.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, pool.size() - start);
      const std::span<const LabeledPair> batch(pool.data() + start, n);
      nn::zero_gradients(params);
      const double loss = siamese_pair_loss(result.model, batch, config.margin, true);
      if (!std::isfinite(loss)) {
        throw NumericError("train_siamese: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch starting at pair " + std::to_string(start));
      }
      nn::clip_gradients(params, config.clip);
      adam.apply(params);
      sum += loss * static_cast<double>(n);
    }
    const double mean = pool.empty() ? 0.0 : sum / static_cast<double>(pool.size());
    result.loss_trace.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

RpForestIndex build_name_index(const SiameseModel& model, const std::vector<std::string>& names,
                               AnnParams params) {
  const auto reps = model.encode_all(names);
  std::vector<IndexItem> items;
  items.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    items.push_back(IndexItem{i, std::vector<double>(reps[i].data(), reps[i].data() + reps[i].size()),
                              names[i]});
  }
  return RpForestIndex::build(std::move(items), params);
}

std::vector<NameMatch> match_name(const SiameseModel& model, const RpForestIndex& index,
                                  std::string_view query, std::size_t k, double threshold,
                                  std::size_t search_budget) {
  if (index.size() == 0) throw ValidationError("match_name: empty index");
  const RowVector q = model.encode(normalized(query));
  const auto neighbors =
      index.query(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), k,
                  search_budget);
  std::vector<NameMatch> out;
  for (const auto& n : neighbors) {
    if (n.distance <= threshold) out.push_back(NameMatch{n.payload, n.distance});
  }
  return out;
}

}  // namespace authnorm
