#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "authnorm/nn/container.hpp"
#include "authnorm/nn/layers.hpp"
#include "authnorm/nn/lstm.hpp"
#include "authnorm/siamese.hpp"

namespace authnorm {

struct Seq2SeqShape {
  std::size_t vocab_size = alphabet::kSize;
  std::size_t embed_dim = 256;
  std::size_t encoder_hidden = 256;  // per direction; decoder width is twice this
  std::size_t decoder_hidden() const { return 2 * encoder_hidden; }
};

struct Seq2SeqTrainConfig {
  double learning_rate = 1e-3;
  double clip = 5.0;
  std::size_t batch_size = 1024;
  int epochs = 10;
  std::uint64_t seed = 0;
};

struct BeamHypothesis {
  std::vector<int> tokens;  // emitted ids, EOS included when finished
  double log_prob = 0.0;
  bool finished = false;
};

/// Character encoder-decoder: shared embedding, biLSTM encoder whose
/// concatenated final (h, c) initialize a plain LSTM decoder, and a dense
/// softmax over the vocabulary.
class Seq2SeqModel {
 public:
  static constexpr const char* kKind = "seq2seq";

  explicit Seq2SeqModel(Seq2SeqShape shape = {}, std::uint64_t seed = 0);

  const Seq2SeqShape& shape() const { return shape_; }
  nn::ParameterList parameters();

  /// Teacher-forced mean cross-entropy. decoder_inputs start with SOS;
  /// targets end with EOS; positions at or past a row's length are ignored.
  /// With accumulate=true gradients of that mean are added to the grads.
  double sequence_loss(const nn::TokenBatch& sources, const nn::TokenBatch& decoder_inputs,
                       const nn::TokenBatch& targets, bool accumulate);

  /// Builds SOS/EOS framing from raw id lists, then calls sequence_loss.
  /// Targets are cut so that target plus EOS fits max_len.
  double pair_loss(std::span<const std::vector<int>> sources,
                   std::span<const std::vector<int>> targets, bool accumulate,
                   std::size_t max_len = kSequenceLength);

  /// Beam search without length normalization. Hypotheses ending in EOS
  /// retire into the result pool; search stops once the pool holds
  /// beam_width hypotheses or after max_len emitted tokens, when the
  /// remaining live hypotheses join the pool unfinished. Results descend by
  /// log-probability, ties by token sequence.
  std::vector<BeamHypothesis> beam_search(std::span<const int> source, std::size_t beam_width,
                                          std::size_t max_len) const;

  /// Stepwise argmax decoding (lowest id on ties).
  BeamHypothesis greedy(std::span<const int> source, std::size_t max_len) const;

  nn::ModelContainer to_container() const;
  static Seq2SeqModel from_container(const nn::ModelContainer& c);
  void save(const std::filesystem::path& path) const { to_container().save(path); }
  static Seq2SeqModel load(const std::filesystem::path& path);

 private:
  nn::LstmState encode_source(std::span<const int> source) const;
  nn::Matrix step_log_probs(const std::vector<int>& last_tokens, nn::LstmState& state) const;

  Seq2SeqShape shape_;
  nn::Parameter embedding_;
  nn::BiLstmParams encoder_;
  nn::LstmParams decoder_;
  nn::DenseParams output_;
};

/// Ids of normalized text, truncated to kSequenceLength.
std::vector<int> text_ids(std::string_view normalized_text);
/// Printable text for ids; control ids are dropped.
std::string ids_text(std::span<const int> ids);

/// Normalizes, searches, and renders hypotheses as text.
std::vector<std::pair<std::string, double>> beam_decode(const Seq2SeqModel& model,
                                                        std::string_view name,
                                                        std::size_t beam_width = 10,
                                                        std::size_t max_len = kSequenceLength);

/// Up to beam_width distinct candidate strings in beam order; may contain
/// the empty string.
std::vector<std::string> correct_name(const Seq2SeqModel& model, std::string_view name,
                                      std::size_t beam_width = 10);

struct Seq2SeqTrainResult {
  Seq2SeqModel model;
  std::vector<double> loss_trace;
};

/// (variant, canonical) pairs of normalized text.
Seq2SeqTrainResult train_seq2seq(const std::vector<std::pair<std::string, std::string>>& pairs,
                                 const Seq2SeqTrainConfig& config, Seq2SeqShape shape = {},
                                 const EpochCallback& on_epoch = {});

}  // namespace authnorm
