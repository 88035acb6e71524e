#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "authnorm/ann_index.hpp"
#include "authnorm/nn/container.hpp"
#include "authnorm/nn/layers.hpp"
#include "authnorm/nn/lstm.hpp"
#include "authnorm/records.hpp"
#include "authnorm/textnorm.hpp"

namespace authnorm {

struct SiameseShape {
  std::size_t embed_dim = 256;
  std::size_t hidden = 128;  // per direction
  std::size_t repr_dim = 256;
};

struct SiameseTrainConfig {
  double learning_rate = 1e-3;
  double clip = 5.0;
  double margin = 0.0;
  std::size_t batch_size = 512;
  int epochs = 10;
  int negative_ratio = 4;
  std::size_t positive_cap = 20;
  std::uint64_t seed = 0;
};

/// Twin encoder with a single shared parameter set:
/// embedding -> biLSTM -> [final fwd h | final bwd h] -> dense.
class SiameseModel {
 public:
  static constexpr const char* kKind = "siamese";

  explicit SiameseModel(SiameseShape shape = {}, std::uint64_t seed = 0);

  const SiameseShape& shape() const { return shape_; }
  nn::ParameterList parameters();

  /// Activations of one encode_batch call. Must stay in place between the
  /// forward and backward passes.
  struct Cache {
    Cache() = default;
    Cache(const Cache&) = delete;
    Cache& operator=(const Cache&) = delete;

    nn::TokenBatch tokens;
    nn::Sequence embedded;
    nn::BiLstmCache encoder;
    nn::Matrix pooled;
  };

  /// One representation row per sequence.
  nn::Matrix encode_batch(std::span<const CharSequence> seqs, Cache* cache) const;
  /// Accumulates parameter gradients for dL/d(representations).
  void backward(const Cache& cache, const nn::Matrix& d_repr);

  /// Representation of already-normalized text.
  nn::RowVector encode(std::string_view normalized_text) const;
  std::vector<nn::RowVector> encode_all(std::span<const std::string> normalized_texts) const;

  nn::ModelContainer to_container() const;
  static SiameseModel from_container(const nn::ModelContainer& c);
  void save(const std::filesystem::path& path) const { to_container().save(path); }
  static SiameseModel load(const std::filesystem::path& path);

 private:
  SiameseShape shape_;
  nn::Parameter embedding_;
  nn::BiLstmParams encoder_;
  nn::DenseParams projection_;
};

/// Representation for a name; same function for both twins.
nn::RowVector encode_name(const SiameseModel& model, const NormalizedName& name);

struct LabeledPair {
  std::string left;
  std::string right;
  int label = 0;  // 1 iff both names belong to the same entity
  std::size_t left_entity = 0;
  std::size_t right_entity = 0;
};

/// Epoch pair pool: all unordered within-entity pairs (capped per entity,
/// fixed across epochs) plus ratio x as many cross-entity negatives, which
/// are redrawn for every epoch. Throws ValidationError for < 2 entities.
std::vector<LabeledPair> sample_pairs(const std::vector<NameEntity>& entities, int ratio,
                                      std::uint64_t seed, std::size_t epoch,
                                      std::size_t positive_cap = 20);

/// Mean contrastive loss over the pairs. With accumulate=true the
/// parameter gradients of that mean are added to the model's grads.
double siamese_pair_loss(SiameseModel& model, std::span<const LabeledPair> pairs, double margin,
                         bool accumulate);

struct SiameseTrainResult {
  SiameseModel model;
  std::vector<double> loss_trace;  // mean loss per epoch
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Throws NumericError if a batch loss becomes non-finite.
SiameseTrainResult train_siamese(const std::vector<NameEntity>& entities,
                                 const SiameseTrainConfig& config, SiameseShape shape = {},
                                 const EpochCallback& on_epoch = {});

struct NameMatch {
  std::string canonical;
  double distance = 0.0;
};

/// Index items for the given canonical names, ids in input order.
RpForestIndex build_name_index(const SiameseModel& model, const std::vector<std::string>& names,
                               AnnParams params);

/// Top-k canonical names by cosine distance, keeping distance <= threshold.
/// Throws ValidationError on an empty index.
std::vector<NameMatch> match_name(const SiameseModel& model, const RpForestIndex& index,
                                  std::string_view query, std::size_t k,
                                  double threshold = std::numeric_limits<double>::infinity(),
                                  std::size_t search_budget = 0);

}  // namespace authnorm
