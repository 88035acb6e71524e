#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "authnorm/biblio.hpp"
#include "authnorm/nn/container.hpp"
#include "authnorm/nn/tensor.hpp"
#include "authnorm/records.hpp"
#include "authnorm/siamese.hpp"

namespace authnorm {

/// Inputs gathered for one book, shared by all of its candidates.
struct CandidateContext {
  std::string input;                     // normalized catalog author
  const AggregateAnswer* sources = nullptr;  // may be null (no ISBN match)
  const std::vector<std::string>* seq2seq_top = nullptr;
  const std::vector<NameMatch>* siamese_matches = nullptr;
  const SiameseModel* siamese = nullptr;
  /// Representation of `input`; computed on demand when empty.
  nn::RowVector input_repr;
};

/// Features of one normalized candidate. Flags use exact string equality;
/// f11 is the cosine distance between the Siamese representations of the
/// candidate and the input (0 without a Siamese model).
FeatureVector extract_features(const std::string& candidate, const CandidateContext& context);

/// Same flags as origin bits.
OriginFlags origin_of(const FeatureVector& features);

struct RankerSample {
  FeatureVector features{};
  int label = 0;

  bool operator==(const RankerSample&) const = default;
};

/// Duplicates minority-class samples, drawn uniformly with replacement,
/// until both classes have the same count. Originals keep their order and
/// copies are appended. Throws ValidationError for single-class input.
std::vector<RankerSample> oversample(const std::vector<RankerSample>& samples, std::uint64_t seed);

struct LogRegConfig {
  double learning_rate = 0.5;
  int epochs = 3000;
  std::uint64_t seed = 0;  // only the optional oversampling step uses it
};

class LogisticModel {
 public:
  static constexpr const char* kKind = "ranker";

  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
  double final_loss = 0.0;

  /// sigmoid(w . x + b).
  double probability(const FeatureVector& x) const;

  nn::ModelContainer to_container() const;
  static LogisticModel from_container(const nn::ModelContainer& c);
  void save(const std::filesystem::path& path) const { to_container().save(path); }
  static LogisticModel load(const std::filesystem::path& path);

  bool operator==(const LogisticModel&) const = default;
};

/// Full-batch gradient descent on the mean log-loss from zero weights.
/// Throws ValidationError without both classes, NumericError if the loss
/// stops being finite.
LogisticModel train_logreg(const std::vector<RankerSample>& samples, const LogRegConfig& config);

double score(const LogisticModel& model, const FeatureVector& x);

inline constexpr double kDecisionThreshold = 0.5;

/// Scores descending, then more source flags, then candidate text.
/// Throws ValidationError if a proposal is unscored.
void rank(std::vector<Proposal>& proposals);

struct ClassRecall {
  double positive = 0.0;
  double negative = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double accuracy = 0.0;
};

ClassRecall class_recall(const LogisticModel& model, const std::vector<RankerSample>& samples,
                         double threshold = kDecisionThreshold);

}  // namespace authnorm
