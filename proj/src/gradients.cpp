#include "authnorm/gradients.hpp"

#include "authnorm/nn/layers.hpp"
#include "authnorm/nn/lstm.hpp"
#include "authnorm/rng.hpp"
#include "authnorm/seq2seq.hpp"
#include "authnorm/siamese.hpp"

namespace authnorm {

namespace {

using nn::Matrix;
using nn::Parameter;

void randomize(nn::Tensor& t, Rng& rng) {
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
}

Parameter random_parameter(const std::string& name, std::vector<std::size_t> shape, Rng& rng) {
  Parameter p(name, std::move(shape));
  randomize(p.value, rng);
  return p;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

// Sequence view of a (T, B, F) tensor.
nn::Sequence as_sequence(const nn::Tensor& t, const std::vector<int>& lengths) {
  const auto time = t.shape()[0], batch = t.shape()[1], feat = t.shape()[2];
  nn::Sequence s;
  s.lengths = lengths;
  for (std::size_t step = 0; step < time; ++step) {
    s.steps.push_back(nn::ConstMatrixMap(t.data().data() + step * batch * feat,
                                         static_cast<Eigen::Index>(batch),
                                         static_cast<Eigen::Index>(feat)));
  }
  return s;
}

void add_sequence_grad(nn::Tensor& grad, const nn::Sequence& d) {
  const auto batch = grad.shape()[1], feat = grad.shape()[2];
  for (std::size_t step = 0; step < d.steps.size(); ++step) {
    nn::MatrixMap(grad.data().data() + step * batch * feat, static_cast<Eigen::Index>(batch),
                  static_cast<Eigen::Index>(feat)) += d.steps[step];
  }
}

double dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

NamedGradCheck check_dense(Rng& rng, const nn::GradCheckOptions& opt) {
  nn::DenseParams dense("dense", 5, 4);
  dense.init(rng);
  randomize(dense.bias.value, rng);
  Parameter x = random_parameter("dense.input", {2, 5}, rng);
  const Matrix upstream = random_matrix(2, 4, rng);
  nn::ParameterList params = dense.parameters();
  params.push_back(&x);
  auto loss = [&] { return dot(nn::dense_forward(x.value.matrix(), dense), upstream); };
  auto analytic = [&] { x.grad.matrix() += nn::dense_backward(x.value.matrix(), upstream, dense); };
  return {"dense", nn::grad_check(params, loss, analytic, opt)};
}

NamedGradCheck check_embedding(Rng& rng, const nn::GradCheckOptions& opt) {
  Parameter table = random_parameter("embedding", {6, 3}, rng);
  const std::vector<std::vector<int>> rows{{1, 4, 4, 2}, {5, 0}};
  const auto ids = nn::TokenBatch::from_ids(rows);
  std::vector<Matrix> upstream;
  for (std::size_t t = 0; t < ids.steps; ++t) upstream.push_back(random_matrix(2, 3, rng));
  auto loss = [&] {
    const auto seq = nn::embedding_forward(ids, table.value);
    double l = 0.0;
    for (std::size_t t = 0; t < seq.time(); ++t) l += dot(seq.steps[t], upstream[t]);
    return l;
  };
  auto analytic = [&] {
    nn::Sequence d;
    d.lengths = ids.lengths;
    d.steps = upstream;
    nn::embedding_backward(ids, d, table.grad);
  };
  return {"embedding", nn::grad_check({&table}, loss, analytic, opt)};
}

NamedGradCheck check_lstm(Rng& rng, const nn::GradCheckOptions& opt, bool reverse) {
  const std::size_t time = 4, batch = 2, input = 3, hidden = 5;
  nn::LstmParams lstm("lstm", input, hidden);
  lstm.init(rng);
  randomize(lstm.bias.value, rng);
  Parameter x = random_parameter("lstm.input", {time, batch, input}, rng);
  Parameter h0 = random_parameter("lstm.h0", {batch, hidden}, rng);
  Parameter c0 = random_parameter("lstm.c0", {batch, hidden}, rng);
  const std::vector<int> lengths{2, 4};  // ragged: exercises masking
  std::vector<Matrix> up_hidden;
  for (std::size_t t = 0; t < time; ++t) up_hidden.push_back(random_matrix(batch, hidden, rng));
  const Matrix up_h = random_matrix(batch, hidden, rng);
  const Matrix up_c = random_matrix(batch, hidden, rng);

  auto forward = [&](nn::LstmCache* cache, const nn::Sequence& seq) {
    const nn::LstmState init{h0.value.matrix(), c0.value.matrix()};
    return nn::lstm_forward(seq, lstm, reverse, cache, &init);
  };
  auto loss = [&] {
    const auto seq = as_sequence(x.value, lengths);
    const auto out = forward(nullptr, seq);
    double l = dot(out.h_final, up_h) + dot(out.c_final, up_c);
    for (std::size_t t = 0; t < time; ++t) l += dot(out.hidden.steps[t], up_hidden[t]);
    return l;
  };
  auto analytic = [&] {
    const auto seq = as_sequence(x.value, lengths);
    nn::LstmCache cache;
    forward(&cache, seq);
    nn::Sequence d;
    d.lengths = lengths;
    d.steps = up_hidden;
    const auto g = nn::lstm_backward(cache, lstm, &d, up_h, up_c);
    add_sequence_grad(x.grad, g.dx);
    h0.grad.matrix() += g.dh0;
    c0.grad.matrix() += g.dc0;
  };
  nn::ParameterList params = lstm.parameters();
  params.insert(params.end(), {&x, &h0, &c0});
  return {reverse ? "lstm (reverse)" : "lstm", nn::grad_check(params, loss, analytic, opt)};
}

NamedGradCheck check_bilstm(Rng& rng, const nn::GradCheckOptions& opt) {
  const std::size_t time = 4, batch = 2, input = 3, hidden = 4;
  nn::BiLstmParams bi("bilstm", input, hidden);
  bi.init(rng);
  Parameter x = random_parameter("bilstm.input", {time, batch, input}, rng);
  const std::vector<int> lengths{4, 3};
  std::vector<Matrix> up_hidden;
  for (std::size_t t = 0; t < time; ++t) up_hidden.push_back(random_matrix(batch, 2 * hidden, rng));
  const Matrix up_h = random_matrix(batch, 2 * hidden, rng);
  const Matrix up_c = random_matrix(batch, 2 * hidden, rng);
  auto loss = [&] {
    const auto out = nn::bilstm_forward(as_sequence(x.value, lengths), bi, nullptr, true);
    double l = dot(out.h_final, up_h) + dot(out.c_final, up_c);
    for (std::size_t t = 0; t < time; ++t) l += dot(out.hidden.steps[t], up_hidden[t]);
    return l;
  };
  auto analytic = [&] {
    const auto seq = as_sequence(x.value, lengths);
    nn::BiLstmCache cache;
    nn::bilstm_forward(seq, bi, &cache, true);
    nn::Sequence d;
    d.lengths = lengths;
    d.steps = up_hidden;
    add_sequence_grad(x.grad, nn::bilstm_backward(cache, bi, &d, up_h, up_c));
  };
  nn::ParameterList params = bi.parameters();
  params.push_back(&x);
  return {"bilstm", nn::grad_check(params, loss, analytic, opt)};
}

NamedGradCheck check_contrastive(Rng& rng, const nn::GradCheckOptions& opt) {
  Parameter u = random_parameter("cosine.u", {6}, rng);
  Parameter v = random_parameter("cosine.v", {6}, rng);
  Parameter w = random_parameter("cosine.w", {6}, rng);
  // The negative pair uses a margin below -1 so its hinge is always active.
  constexpr double kMargin = -1.5;
  auto loss = [&] {
    const double s_pos = nn::cosine_similarity(u.value.row_vector(), v.value.row_vector());
    const double s_neg = nn::cosine_similarity(u.value.row_vector(), w.value.row_vector());
    return nn::contrastive_loss(s_pos, 1, kMargin).loss + nn::contrastive_loss(s_neg, 0, kMargin).loss;
  };
  auto analytic = [&] {
    nn::RowVector du, dv;
    const double s_pos = nn::cosine_similarity(u.value.row_vector(), v.value.row_vector(), &du, &dv);
    const double g_pos = nn::contrastive_loss(s_pos, 1, kMargin).grad;
    u.grad.row_vector() += g_pos * du;
    v.grad.row_vector() += g_pos * dv;
    const double s_neg = nn::cosine_similarity(u.value.row_vector(), w.value.row_vector(), &du, &dv);
    const double g_neg = nn::contrastive_loss(s_neg, 0, kMargin).grad;
    u.grad.row_vector() += g_neg * du;
    w.grad.row_vector() += g_neg * dv;
  };
  return {"cosine + contrastive", nn::grad_check({&u, &v, &w}, loss, analytic, opt)};
}

NamedGradCheck check_cross_entropy(Rng& rng, const nn::GradCheckOptions& opt) {
  const std::size_t time = 4, batch = 2, vocab = 5;
  Parameter logits = random_parameter("logits", {time, batch, vocab}, rng);
  const std::vector<std::vector<int>> rows{{1, 3, 0, 4}, {2, 2}};
  const auto targets = nn::TokenBatch::from_ids(rows);
  auto steps = [&] {
    std::vector<Matrix> out;
    for (const auto& m : as_sequence(logits.value, targets.lengths).steps) out.push_back(m);
    return out;
  };
  auto loss = [&] { return nn::softmax_cross_entropy(steps(), targets, nullptr); };
  auto analytic = [&] {
    std::vector<Matrix> d;
    nn::softmax_cross_entropy(steps(), targets, &d);
    nn::Sequence seq;
    seq.lengths = targets.lengths;
    seq.steps = d;
    add_sequence_grad(logits.grad, seq);
  };
  return {"softmax cross-entropy", nn::grad_check({&logits}, loss, analytic, opt)};
}

}  // namespace

std::vector<NamedGradCheck> check_layer_gradients(std::uint64_t seed,
                                                  const nn::GradCheckOptions& options) {
  Rng rng(derive_seed(seed, "gradcheck.layers"));
  std::vector<NamedGradCheck> out;
  out.push_back(check_dense(rng, options));
  out.push_back(check_embedding(rng, options));
  out.push_back(check_lstm(rng, options, false));
  out.push_back(check_lstm(rng, options, true));
  out.push_back(check_bilstm(rng, options));
  out.push_back(check_contrastive(rng, options));
  out.push_back(check_cross_entropy(rng, options));
  return out;
}

nn::GradCheckReport check_siamese_gradients(std::uint64_t seed,
                                            const nn::GradCheckOptions& options) {
  SiameseModel model(SiameseShape{4, 3, 5}, derive_seed(seed, "gradcheck.siamese"));
  // Two pairs over names of at most four characters; the margin keeps the
  // negative pair's hinge active so its gradient is exercised.
  const std::vector<LabeledPair> pairs{{"ab", "abc", 1, 0, 0}, {"zola", "b.", 0, 0, 1}};
  constexpr double kMargin = -1.5;
  auto params = model.parameters();
  return nn::grad_check(
      params, [&] { return siamese_pair_loss(model, pairs, kMargin, false); },
      [&] { siamese_pair_loss(model, pairs, kMargin, true); }, options);
}

nn::GradCheckReport check_seq2seq_gradients(std::uint64_t seed,
                                            const nn::GradCheckOptions& options) {
  Seq2SeqShape shape;
  shape.embed_dim = 4;
  shape.encoder_hidden = 3;
  Seq2SeqModel model(shape, derive_seed(seed, "gradcheck.seq2seq"));
  const std::vector<std::vector<int>> sources{text_ids("zla"), text_ids("b.")};
  const std::vector<std::vector<int>> targets{text_ids("zol"), text_ids("b")};
  auto params = model.parameters();
  return nn::grad_check(
      params, [&] { return model.pair_loss(sources, targets, false); },
      [&] { model.pair_loss(sources, targets, true); }, options);
}

std::vector<NamedGradCheck> check_all_gradients(std::uint64_t seed,
                                                const nn::GradCheckOptions& options) {
  auto out = check_layer_gradients(seed, options);
  out.push_back({"siamese", check_siamese_gradients(seed, options)});
  out.push_back({"seq2seq", check_seq2seq_gradients(seed, options)});
  return out;
}

}  // namespace authnorm
