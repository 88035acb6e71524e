#include "authnorm/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "authnorm/error.hpp"
#include "authnorm/nn/optim.hpp"
#include "authnorm/rng.hpp"

namespace authnorm {

using nn::Matrix;

Seq2SeqModel::Seq2SeqModel(Seq2SeqShape shape, std::uint64_t seed)
    : shape_(shape),
      embedding_("seq2seq.embedding", {shape.vocab_size, shape.embed_dim}),
      encoder_("seq2seq.encoder", shape.embed_dim, shape.encoder_hidden),
      decoder_("seq2seq.decoder", shape.embed_dim, shape.decoder_hidden()),
      output_("seq2seq.output", shape.decoder_hidden(), shape.vocab_size) {
  if (shape.vocab_size <= static_cast<std::size_t>(alphabet::kEos)) {
    throw ValidationError("seq2seq: vocabulary must contain the control symbols");
  }
  if (decoder_.hidden_size != 2 * encoder_.forward.hidden_size) {
    throw ValidationError("seq2seq: decoder width must equal the concatenated encoder state");
  }
  Rng rng(derive_seed(seed, "seq2seq.init"));
  init_uniform(embedding_.value, shape.embed_dim, rng);
  encoder_.init(rng);
  decoder_.init(rng);
  output_.init(rng);
}

nn::ParameterList Seq2SeqModel::parameters() {
  nn::ParameterList out{&embedding_};
  for (auto* p : encoder_.parameters()) out.push_back(p);
  for (auto* p : decoder_.parameters()) out.push_back(p);
  for (auto* p : output_.parameters()) out.push_back(p);
  return out;
}

double Seq2SeqModel::sequence_loss(const nn::TokenBatch& sources,
                                   const nn::TokenBatch& decoder_inputs,
                                   const nn::TokenBatch& targets, bool accumulate) {
  if (sources.batch() != decoder_inputs.batch() || targets.batch() != decoder_inputs.batch() ||
      targets.steps != decoder_inputs.steps || targets.lengths != decoder_inputs.lengths) {
    throw ValidationError("seq2seq: inconsistent batch framing");
  }
  const auto src_emb = nn::embedding_forward(sources, embedding_.value);
  nn::BiLstmCache enc_cache;
  const auto enc = nn::bilstm_forward(src_emb, encoder_, accumulate ? &enc_cache : nullptr, false);
  const nn::LstmState bridge{enc.h_final, enc.c_final};

  const auto dec_emb = nn::embedding_forward(decoder_inputs, embedding_.value);
  nn::LstmCache dec_cache;
  const auto dec = nn::lstm_forward(dec_emb, decoder_, false, accumulate ? &dec_cache : nullptr,
                                    &bridge);
  std::vector<Matrix> logits;
  logits.reserve(dec.hidden.time());
  for (const auto& h : dec.hidden.steps) logits.push_back(nn::dense_forward(h, output_));

  std::vector<Matrix> dlogits;
  const double loss = nn::softmax_cross_entropy(logits, targets, accumulate ? &dlogits : nullptr);
  if (!accumulate) return loss;

  nn::Sequence d_hidden;
  d_hidden.lengths = dec.hidden.lengths;
  for (std::size_t t = 0; t < dlogits.size(); ++t) {
    d_hidden.steps.push_back(nn::dense_backward(dec.hidden.steps[t], dlogits[t], output_));
  }
  const auto batch = static_cast<Eigen::Index>(sources.batch());
  const auto width = static_cast<Eigen::Index>(decoder_.hidden_size);
  const Matrix zero = Matrix::Zero(batch, width);
  const auto dec_grads = nn::lstm_backward(dec_cache, decoder_, &d_hidden, zero, zero);
  nn::embedding_backward(decoder_inputs, dec_grads.dx, embedding_.grad);
  const auto d_src = nn::bilstm_backward(enc_cache, encoder_, nullptr, dec_grads.dh0, dec_grads.dc0);
  nn::embedding_backward(sources, d_src, embedding_.grad);
  return loss;
}

double Seq2SeqModel::pair_loss(std::span<const std::vector<int>> sources,
                               std::span<const std::vector<int>> targets, bool accumulate,
                               std::size_t max_len) {
  if (sources.size() != targets.size()) throw ValidationError("seq2seq: pair count mismatch");
  if (max_len == 0) throw ValidationError("seq2seq: max_len must be positive");
  std::vector<std::vector<int>> dec_in, dec_out;
  dec_in.reserve(targets.size());
  dec_out.reserve(targets.size());
  for (const auto& t : targets) {
    const std::size_t keep = std::min(t.size(), max_len - 1);
    std::vector<int> in{alphabet::kSos};
    in.insert(in.end(), t.begin(), t.begin() + static_cast<std::ptrdiff_t>(keep));
    std::vector<int> out(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(keep));
    out.push_back(alphabet::kEos);
    dec_in.push_back(std::move(in));
    dec_out.push_back(std::move(out));
  }
  return sequence_loss(nn::TokenBatch::from_ids(sources), nn::TokenBatch::from_ids(dec_in),
                       nn::TokenBatch::from_ids(dec_out), accumulate);
}

nn::LstmState Seq2SeqModel::encode_source(std::span<const int> source) const {
  const std::vector<int> row(source.begin(), source.end());
  const auto tokens = nn::TokenBatch::from_ids(std::span<const std::vector<int>>(&row, 1));
  const auto emb = nn::embedding_forward(tokens, embedding_.value);
  const auto enc = nn::bilstm_forward(emb, encoder_, nullptr, false);
  return nn::LstmState{enc.h_final, enc.c_final};
}

Matrix Seq2SeqModel::step_log_probs(const std::vector<int>& last_tokens,
                                    nn::LstmState& state) const {
  const auto table = embedding_.value.matrix();
  Matrix x(static_cast<Eigen::Index>(last_tokens.size()), table.cols());
  for (std::size_t i = 0; i < last_tokens.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = table.row(last_tokens[i]);
  }
  state = nn::lstm_cell(x, state, decoder_);
  return nn::log_softmax(nn::dense_forward(state.h, output_));
}

std::vector<BeamHypothesis> Seq2SeqModel::beam_search(std::span<const int> source,
                                                      std::size_t beam_width,
                                                      std::size_t max_len) const {
  if (beam_width == 0) throw ValidationError("beam_search: beam width must be positive");
  const auto vocab = static_cast<int>(shape_.vocab_size);
  std::vector<BeamHypothesis> live{BeamHypothesis{}};
  nn::LstmState state = encode_source(source);
  std::vector<BeamHypothesis> pool;
  bool pool_full = false;

  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<int> last;
    last.reserve(live.size());
    for (const auto& h : live) last.push_back(h.tokens.empty() ? alphabet::kSos : h.tokens.back());
    const Matrix log_probs = step_log_probs(last, state);

    // (score, hypothesis, token); best first, then lower hypothesis/token.
    std::vector<std::tuple<double, int, int>> cand;
    cand.reserve(live.size() * static_cast<std::size_t>(vocab));
    for (int i = 0; i < static_cast<int>(live.size()); ++i) {
      for (int v = 0; v < vocab; ++v) {
        cand.emplace_back(live[static_cast<std::size_t>(i)].log_prob + log_probs(i, v), i, v);
      }
    }
    const std::size_t keep = std::min(beam_width, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(),
                      [](const auto& a, const auto& b) {
                        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
                        return std::tie(std::get<1>(a), std::get<2>(a)) <
                               std::tie(std::get<1>(b), std::get<2>(b));
                      });

    std::vector<BeamHypothesis> next;
    std::vector<Eigen::Index> rows;
    for (std::size_t c = 0; c < keep; ++c) {
      const auto [score, i, v] = cand[c];
      BeamHypothesis h{live[static_cast<std::size_t>(i)].tokens, score, v == alphabet::kEos};
      h.tokens.push_back(v);
      if (h.finished) {
        pool.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
        rows.push_back(i);
      }
    }
    nn::LstmState kept{Matrix(static_cast<Eigen::Index>(rows.size()), state.h.cols()),
                       Matrix(static_cast<Eigen::Index>(rows.size()), state.c.cols())};
    for (std::size_t r = 0; r < rows.size(); ++r) {
      kept.h.row(static_cast<Eigen::Index>(r)) = state.h.row(rows[r]);
      kept.c.row(static_cast<Eigen::Index>(r)) = state.c.row(rows[r]);
    }
    state = std::move(kept);
    live = std::move(next);
    if (pool.size() >= beam_width) {
      pool_full = true;
      break;
    }
  }
  if (!pool_full) {
    for (auto& h : live) pool.push_back(std::move(h));
  }
  std::stable_sort(pool.begin(), pool.end(), [](const BeamHypothesis& a, const BeamHypothesis& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.tokens < b.tokens;
  });
  if (pool.size() > beam_width) pool.resize(beam_width);
  return pool;
}

BeamHypothesis Seq2SeqModel::greedy(std::span<const int> source, std::size_t max_len) const {
  nn::LstmState state = encode_source(source);
  BeamHypothesis h;
  for (std::size_t step = 0; step < max_len; ++step) {
    const std::vector<int> last{h.tokens.empty() ? alphabet::kSos : h.tokens.back()};
    const Matrix log_probs = step_log_probs(last, state);
    Eigen::Index best = 0;
    for (Eigen::Index v = 1; v < log_probs.cols(); ++v) {
      if (log_probs(0, v) > log_probs(0, best)) best = v;
    }
    h.tokens.push_back(static_cast<int>(best));
    h.log_prob += log_probs(0, best);
    if (best == alphabet::kEos) {
      h.finished = true;
      break;
    }
  }
  return h;
}

nn::ModelContainer Seq2SeqModel::to_container() const {
  nn::ModelContainer c;
  c.kind = kKind;
  c.hyper["vocab_size"] = std::to_string(shape_.vocab_size);
  c.hyper["embed_dim"] = std::to_string(shape_.embed_dim);
  c.hyper["encoder_hidden"] = std::to_string(shape_.encoder_hidden);
  c.hyper["decoder_hidden"] = std::to_string(shape_.decoder_hidden());
  if (shape_.vocab_size == static_cast<std::size_t>(alphabet::kSize)) c.vocab = nn::alphabet_vocab();
  c.put(const_cast<Seq2SeqModel*>(this)->parameters());
  return c;
}

Seq2SeqModel Seq2SeqModel::from_container(const nn::ModelContainer& c) {
  if (c.kind != kKind) throw FormatError("expected a seq2seq container, found " + c.kind);
  Seq2SeqShape shape;
  shape.vocab_size = std::stoul(c.require("vocab_size"));
  shape.embed_dim = std::stoul(c.require("embed_dim"));
  shape.encoder_hidden = std::stoul(c.require("encoder_hidden"));
  if (std::stoul(c.require("decoder_hidden")) != shape.decoder_hidden()) {
    throw FormatError("seq2seq container: decoder width is not twice the encoder width");
  }
  if (!c.vocab.empty() && c.vocab != nn::alphabet_vocab()) {
    throw FormatError("seq2seq container alphabet mismatch");
  }
  Seq2SeqModel model(shape);
  c.take(model.parameters());
  return model;
}

Seq2SeqModel Seq2SeqModel::load(const std::filesystem::path& path) {
  return from_container(nn::ModelContainer::load(path, kKind));
}

std::vector<int> text_ids(std::string_view text) {
  const auto seq = encode(text);
  return std::vector<int>(seq.ids.begin(), seq.ids.begin() + static_cast<std::ptrdiff_t>(seq.length));
}

std::string ids_text(std::span<const int> ids) {
  std::string out;
  for (int id : ids) {
    if (!alphabet::is_control(id)) out.push_back(alphabet::char_of(id));
  }
  return out;
}

std::vector<std::pair<std::string, double>> beam_decode(const Seq2SeqModel& model,
                                                        std::string_view name,
                                                        std::size_t beam_width,
                                                        std::size_t max_len) {
  const auto source = text_ids(normalized(name));
  std::vector<std::pair<std::string, double>> out;
  for (const auto& h : model.beam_search(source, beam_width, max_len)) {
    out.emplace_back(ids_text(h.tokens), h.log_prob);
  }
  return out;
}

std::vector<std::string> correct_name(const Seq2SeqModel& model, std::string_view name,
                                      std::size_t beam_width) {
  std::vector<std::string> out;
  for (auto& [text, lp] : beam_decode(model, name, beam_width)) {
    if (std::find(out.begin(), out.end(), text) == out.end()) out.push_back(std::move(text));
  }
  return out;
}

Seq2SeqTrainResult train_seq2seq(const std::vector<std::pair<std::string, std::string>>& pairs,
                                 const Seq2SeqTrainConfig& config, Seq2SeqShape shape,
                                 const EpochCallback& on_epoch) {
  if (pairs.empty()) throw ValidationError("train_seq2seq: no pairs");
  if (config.batch_size == 0) throw ValidationError("train_seq2seq: batch size must be positive");
  std::vector<std::vector<int>> sources, targets;
  for (const auto& [variant, canonical] : pairs) {
    sources.push_back(text_ids(variant));
    targets.push_back(text_ids(canonical));
  }
  Seq2SeqTrainResult result{Seq2SeqModel(shape, config.seed), {}};
  auto params = result.model.parameters();
  nn::AdamState adam(params, nn::AdamConfig{config.learning_rate});
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, "seq2seq.shuffle", static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      std::vector<std::vector<int>> bs, bt;
      for (std::size_t i = start; i < start + n; ++i) {
        bs.push_back(sources[order[i]]);
        bt.push_back(targets[order[i]]);
      }
      nn::zero_gradients(params);
      const double loss = result.model.pair_loss(bs, bt, true);
      if (!std::isfinite(loss)) {
        throw NumericError("train_seq2seq: non-finite loss at epoch " + std::to_string(epoch));
      }
      nn::clip_gradients(params, config.clip);
      adam.apply(params);
      sum += loss * static_cast<double>(n);
    }
    const double mean = sum / static_cast<double>(order.size());
    result.loss_trace.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace authnorm
