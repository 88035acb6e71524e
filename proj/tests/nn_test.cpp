#include <gtest/gtest.h>

#include <cmath>

#include "authnorm/error.hpp"
#include "authnorm/gradients.hpp"
#include "authnorm/nn/container.hpp"
#include "authnorm/nn/grad_check.hpp"
#include "authnorm/nn/layers.hpp"
#include "authnorm/nn/lstm.hpp"
#include "authnorm/nn/optim.hpp"
#include "authnorm/rng.hpp"
#include "test_util.hpp"

namespace authnorm::nn {
namespace {

Sequence random_sequence(std::size_t time, std::size_t batch, std::size_t features, Rng& rng,
                         std::vector<int> lengths = {}) {
  Sequence s;
  s.lengths = lengths.empty() ? std::vector<int>(batch, static_cast<int>(time)) : lengths;
  for (std::size_t t = 0; t < time; ++t) {
    Matrix m(batch, features);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
    s.steps.push_back(m);
  }
  return s;
}

TEST(Lstm, ZeroParametersGiveZeroStates) {
  LstmParams p("l", 3, 4);  // constructed with all-zero tensors
  Rng rng(1);
  const auto x = random_sequence(5, 2, 3, rng);
  const auto out = lstm_forward(x, p, false, nullptr);
  for (const auto& h : out.hidden.steps) EXPECT_EQ(h.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(out.h_final.cwiseAbs().maxCoeff(), 0.0);
}

// Reference cell written from the gate equations, one row at a time.
RowVector sigmoid(const RowVector& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

TEST(Lstm, MatchesScalarReference) {
  Rng rng(2);
  LstmParams p("l", 3, 4);
  p.init(rng);
  for (auto* q : p.parameters()) {
    for (auto& v : q->value.data()) v += rng.uniform(-0.3, 0.3);
  }
  const auto x = random_sequence(4, 2, 3, rng, {4, 2});
  for (bool reverse : {false, true}) {
    const auto out = lstm_forward(x, p, reverse, nullptr);
    for (std::size_t b = 0; b < 2; ++b) {
      const int len = x.lengths[b];
      RowVector h = RowVector::Zero(4), c = RowVector::Zero(4);
      for (int s = 0; s < len; ++s) {
        const int t = reverse ? len - 1 - s : s;
        const RowVector z = x.steps[t].row(b) * p.w_input.value.matrix() +
                            h * p.w_hidden.value.matrix() + p.bias.value.row_vector();
        const RowVector i = sigmoid(z.segment(0, 4)), f = sigmoid(z.segment(4, 4));
        const RowVector g = z.segment(8, 4).array().tanh().matrix();
        const RowVector o = sigmoid(z.segment(12, 4));
        c = f.cwiseProduct(c) + i.cwiseProduct(g);
        h = o.cwiseProduct(c.array().tanh().matrix());
        EXPECT_LT((out.hidden.steps[t].row(b) - h).cwiseAbs().maxCoeff(), 1e-12);
      }
      for (std::size_t t = len; t < 4; ++t) EXPECT_EQ(out.hidden.steps[t].row(b).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_LT((out.h_final.row(b) - h).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((out.c_final.row(b) - c).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(BiLstm, PalindromeWithSharedWeightsGivesMirroredHalves) {
  Rng rng(3);
  BiLstmParams p("bi", 2, 3);
  p.forward.init(rng);
  p.backward = p.forward;
  Sequence x = random_sequence(3, 1, 2, rng);
  x.steps[2] = x.steps[0];  // a b a
  const auto out = bilstm_forward(x, p, nullptr, true);
  for (std::size_t t = 0; t < 3; ++t) {
    const RowVector fwd = out.hidden.steps[t].row(0).head(3);
    const RowVector bwd = out.hidden.steps[2 - t].row(0).tail(3);
    EXPECT_LT((fwd - bwd).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Dense, IdentityAndBiasOnly) {
  DenseParams p("d", 3, 3);
  p.weight.value.matrix() = Matrix::Identity(3, 3);
  Matrix x(2, 3);
  x << 1, 2, 3, -4, 5, 6;
  EXPECT_EQ(dense_forward(x, p), x);
  p.weight.value.fill(0.0);
  p.bias.value.row_vector() << 7, 8, 9;
  const Matrix y = dense_forward(x, p);
  for (int r = 0; r < 2; ++r) EXPECT_EQ(y.row(r), p.bias.value.row_vector());
}

TEST(Cosine, Examples) {
  RowVector u(3), v(3);
  u << 1, 2, 3;
  EXPECT_NEAR(cosine_similarity(u, u), 1.0, 1e-15);
  u << 1, 0, 0;
  v << 0, 1, 0;
  EXPECT_EQ(cosine_similarity(u, v), 0.0);
  RowVector zero = RowVector::Zero(3), du, dv;
  EXPECT_EQ(cosine_similarity(zero, v, &du, &dv), 0.0);
  EXPECT_EQ(du.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Contrastive, Examples) {
  EXPECT_EQ(contrastive_loss(1.0, 1, 0.0).loss, 0.0);
  EXPECT_EQ(contrastive_loss(-0.2, 0, 0.0).loss, 0.0);
  EXPECT_EQ(contrastive_loss(-0.2, 0, 0.0).grad, 0.0);
  const auto lg = contrastive_loss(0.5, 0, 0.0);
  EXPECT_DOUBLE_EQ(lg.loss, 0.25);
  EXPECT_DOUBLE_EQ(lg.grad, 1.0);
  EXPECT_DOUBLE_EQ(contrastive_loss(0.25, 1, 0.0).loss, 0.5625);
  EXPECT_DOUBLE_EQ(contrastive_loss(0.25, 1, 0.0).grad, -1.5);
}

TEST(SoftmaxCrossEntropy, UniformAndConfidentLimits) {
  TokenBatch targets;
  targets.steps = 2;
  targets.ids = {1, 3, 0, 2};
  targets.lengths = {2, 1};
  std::vector<Matrix> logits(2, Matrix::Zero(2, 4));
  EXPECT_NEAR(softmax_cross_entropy(logits, targets, nullptr), std::log(4.0), 1e-12);
  logits[0](0, 1) = logits[1](0, 3) = logits[0](1, 0) = 800.0;
  EXPECT_LT(softmax_cross_entropy(logits, targets, nullptr), 1e-12);
  // The padded position of row 1 does not count.
  logits[1](1, 1) = -1e6;
  EXPECT_LT(softmax_cross_entropy(logits, targets, nullptr), 1e-12);
}

TEST(LogSoftmax, RowsNormalize) {
  Matrix z(2, 3);
  z << 1, 2, 3, 1000, -1000, 0;
  const Matrix l = log_softmax(z);
  for (int r = 0; r < 2; ++r) EXPECT_NEAR(l.row(r).array().exp().sum(), 1.0, 1e-12);
}

TEST(Clip, ComponentWise) {
  Parameter p("p", {4});
  p.grad.row_vector() << 7, -9, 3, -5;
  clip_gradients({&p}, 5.0);
  EXPECT_EQ(p.grad[0], 5.0);
  EXPECT_EQ(p.grad[1], -5.0);
  EXPECT_EQ(p.grad[2], 3.0);
  EXPECT_EQ(p.grad[3], -5.0);
}

TEST(Adam, ZeroGradientLeavesParametersButCountsStep) {
  Parameter p("p", {3});
  p.value.row_vector() << 1, 2, 3;
  AdamState adam({&p});
  adam.apply({&p});
  EXPECT_EQ(adam.step(), 1);
  EXPECT_EQ(p.value.row_vector(), (RowVector(3) << 1, 2, 3).finished());
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  Parameter p("p", {3});
  p.grad.row_vector() << 0.3, -20, 1e-3;
  AdamState adam({&p}, AdamConfig{0.01});
  adam.apply({&p});
  // m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.value[0], -0.01, 1e-9);
  EXPECT_NEAR(p.value[1], 0.01, 1e-9);
  EXPECT_NEAR(p.value[2], -0.01, 1e-6);
}

TEST(GradCheck, LinearModelIsExact) {
  Rng rng(4);
  Parameter w("w", {5});
  for (auto& v : w.value.data()) v = rng.uniform(-1, 1);
  RowVector a(5);
  a << 1, -2, 3, 0.5, 4;
  auto loss = [&] { return w.value.row_vector().dot(a); };
  auto grad = [&] { w.grad.row_vector() += a; };
  const auto report = grad_check({&w}, loss, grad);
  EXPECT_TRUE(report.passed());
  EXPECT_LT(report.max_relative_error, 1e-9);
}

TEST(GradCheck, CorruptedBackwardIsFlagged) {
  Parameter w("w", {3});
  w.value.row_vector() << 0.5, -1, 2;
  auto loss = [&] { return w.value.row_vector().squaredNorm(); };
  auto wrong = [&] { w.grad.row_vector() += 2.1 * w.value.row_vector(); };
  const auto report = grad_check({&w}, loss, wrong);
  EXPECT_FALSE(report.passed());
  ASSERT_EQ(report.blocks.size(), 1u);
  EXPECT_TRUE(report.blocks[0].flagged);
}

TEST(GradCheck, LayersAndModelsPass) {
  for (const auto& check : check_all_gradients(17)) {
    EXPECT_TRUE(check.report.passed()) << check.name << " " << check.report.max_relative_error;
  }
}

TEST(Container, RoundTripAndErrors) {
  ModelContainer c;
  c.kind = "toy";
  c.hyper["a"] = "1";
  c.vocab = alphabet_vocab();
  Tensor t({2, 3});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.1 * static_cast<double>(i) - 0.2;
  c.tensors.emplace_back("w", t);
  const auto bytes = c.serialize();
  const auto back = ModelContainer::deserialize(bytes);
  EXPECT_EQ(back.kind, "toy");
  EXPECT_EQ(back.hyper, c.hyper);
  EXPECT_EQ(back.vocab, c.vocab);
  ASSERT_EQ(back.tensors.size(), 1u);
  EXPECT_EQ(back.tensors[0].second, t);
  EXPECT_EQ(back.serialize(), bytes);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  EXPECT_THROW(ModelContainer::deserialize(truncated), FormatError);

  auto bumped = bytes;
  bumped[4] += 1;
  try {
    ModelContainer::deserialize(bumped);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }

  test::TempDir dir;
  c.save(dir.path() / "m.anmc");
  EXPECT_THROW(ModelContainer::load(dir.path() / "m.anmc", "other"), FormatError);
  EXPECT_THROW(ModelContainer::load(dir.path() / "missing.anmc"), IoError);
}

TEST(Container, TakeRequiresMatchingShapes) {
  ModelContainer c;
  Parameter p("w", {2, 2});
  c.put({&p});
  Parameter q("w", {2, 3});
  EXPECT_THROW(c.take({&q}), FormatError);
}

TEST(Embedding, RejectsOutOfRangeIds) {
  Tensor table({3, 2});
  TokenBatch ids;
  ids.steps = 1;
  ids.ids = {5};
  ids.lengths = {1};
  EXPECT_THROW(embedding_forward(ids, table), ValidationError);
}

}  // namespace
}  // namespace authnorm::nn
