#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "authnorm/error.hpp"
#include "authnorm/ranker.hpp"
#include "test_util.hpp"

namespace authnorm {
namespace {

AggregateAnswer answers_with(SourceId id, const std::string& name) {
  AggregateAnswer a;
  for (auto s : all_sources()) a[source_index(s)].source = s;
  a[source_index(id)].status = AnswerStatus::kFound;
  a[source_index(id)].author_names = {name};
  return a;
}

TEST(Features, IdentityCandidate) {
  const SiameseModel model({8, 6, 5}, 1);
  CandidateContext ctx;
  ctx.input = "emile zola";
  ctx.siamese = &model;
  const auto f = extract_features("emile zola", ctx);
  EXPECT_EQ(f[8], 1.0);
  EXPECT_LE(f[11], 1e-9);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(f[i], 0.0);
}

TEST(Features, CandidateFromNoGenerator) {
  const SiameseModel model({8, 6, 5}, 1);
  const auto sources = answers_with(SourceId::kOclc, "zola, emile");
  const std::vector<std::string> beam{"emile zola"};
  const std::vector<NameMatch> matches{{"emile zola", 0.1}};
  CandidateContext ctx{"emile zola", &sources, &beam, &matches, &model, {}};
  const auto f = extract_features("victor hugo", ctx);
  for (int i = 0; i <= 10; ++i) EXPECT_EQ(f[i], 0.0) << i;
  EXPECT_GT(f[11], 0.0);
}

TEST(Features, GoodreadsOnly) {
  const auto sources = answers_with(SourceId::kGoodreads, "victor hugo");
  CandidateContext ctx;
  ctx.input = "hugo";
  ctx.sources = &sources;
  const auto f = extract_features("victor hugo", ctx);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(f[i], i == 2 ? 1.0 : 0.0);
  EXPECT_EQ(origin_of(f).source_count(), 1);
  EXPECT_FALSE(origin_of(f).input);
}

TEST(Features, OriginFlagsMirrorBits) {
  FeatureVector f{};
  f[0] = f[5] = f[9] = 1.0;
  const auto o = origin_of(f);
  EXPECT_TRUE(o.sources[0]);
  EXPECT_TRUE(o.sources[5]);
  EXPECT_TRUE(o.seq2seq);
  EXPECT_FALSE(o.siamese);
  EXPECT_EQ(o.source_count(), 2);
}

std::vector<RankerSample> labeled(int positives, int negatives) {
  std::vector<RankerSample> out;
  for (int i = 0; i < positives; ++i) {
    RankerSample s;
    s.features[0] = 1;
    s.features[11] = 0.01 * i;
    s.label = 1;
    out.push_back(s);
  }
  for (int i = 0; i < negatives; ++i) {
    RankerSample s;
    s.features[11] = 0.5 + 0.01 * i;
    out.push_back(s);
  }
  return out;
}

TEST(Oversample, BalancesClasses) {
  const auto samples = labeled(2, 10);
  const auto out = oversample(samples, 3);
  const auto pos = std::count_if(out.begin(), out.end(), [](const auto& s) { return s.label == 1; });
  EXPECT_EQ(pos, 10);
  EXPECT_EQ(out.size(), 20u);
  EXPECT_TRUE(std::equal(samples.begin(), samples.end(), out.begin()));
  for (std::size_t i = samples.size(); i < out.size(); ++i) {
    EXPECT_NE(std::find(samples.begin(), samples.begin() + 2, out[i]), samples.begin() + 2);
  }
}

TEST(Oversample, BalancedInputUnchanged) {
  const auto samples = labeled(4, 4);
  EXPECT_EQ(oversample(samples, 3), samples);
  EXPECT_THROW(oversample(labeled(3, 0), 1), ValidationError);
}

// Points on either side of a random hyperplane with a margin.
std::vector<RankerSample> separable(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  FeatureVector w;
  for (auto& x : w) x = rng.uniform(-1, 1);
  std::vector<RankerSample> out;
  while (out.size() < n) {
    RankerSample s;
    double dot = -0.1;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      s.features[i] = i < 11 ? static_cast<double>(rng.below(2)) : rng.uniform();
      dot += w[i] * s.features[i];
    }
    if (std::abs(dot) < 0.2) continue;
    s.label = dot > 0;
    out.push_back(s);
  }
  return out;
}

TEST(LogReg, SeparableDataIsLearned) {
  const auto samples = separable(1, 400);
  const auto model = train_logreg(samples, {});
  EXPECT_GE(class_recall(model, samples).accuracy, 0.99);
}

TEST(LogReg, LabelFlipMirrorsDecisions) {
  auto samples = separable(2, 200);
  const auto model = train_logreg(samples, {});
  for (auto& s : samples) s.label = 1 - s.label;
  const auto flipped = train_logreg(samples, {});
  for (const auto& s : samples) {
    EXPECT_NEAR(model.probability(s.features), 1.0 - flipped.probability(s.features), 1e-9);
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_NEAR(model.weights[i], -flipped.weights[i], 1e-9);
}

TEST(LogReg, DeterministicAndValidated) {
  const auto samples = separable(3, 100);
  EXPECT_EQ(train_logreg(samples, {}), train_logreg(samples, {}));
  EXPECT_THROW(train_logreg(labeled(3, 0), {}), ValidationError);
  EXPECT_THROW(train_logreg({}, {}), ValidationError);
}

TEST(Score, Examples) {
  LogisticModel m;
  FeatureVector x{};
  x[3] = 1;
  EXPECT_EQ(score(m, x), 0.5);
  m.bias = 800;
  EXPECT_NEAR(score(m, x), 1.0, 1e-15);
  m.bias = -2;
  m.weights[3] = 2;
  EXPECT_EQ(score(m, x), 0.5);
  m.bias = -1e6;
  EXPECT_GE(score(m, x), 0.0);
}

TEST(Rank, OrderAndTieBreaks) {
  std::vector<Proposal> ps(4);
  ps[0].candidate = "b";
  ps[0].score = 0.9;
  ps[1].candidate = "one source";
  ps[1].score = 0.5;
  ps[1].origin.sources[0] = true;
  ps[2].candidate = "three sources";
  ps[2].score = 0.5;
  ps[2].origin.sources = {true, true, true};
  ps[3].candidate = "a";
  ps[3].score = 0.9;
  rank(ps);
  EXPECT_EQ(ps[0].candidate, "a");
  EXPECT_EQ(ps[1].candidate, "b");
  EXPECT_EQ(ps[2].candidate, "three sources");
  EXPECT_EQ(ps[3].candidate, "one source");
  ps[0].score.reset();
  EXPECT_THROW(rank(ps), ValidationError);
}

TEST(LogisticModel, ContainerRoundTrip) {
  const auto model = train_logreg(separable(4, 50), {});
  test::TempDir dir;
  model.save(dir.path() / "r.anmc");
  const auto back = LogisticModel::load(dir.path() / "r.anmc");
  EXPECT_EQ(back.weights, model.weights);
  EXPECT_EQ(back.bias, model.bias);
}

TEST(ClassRecall, Counts) {
  LogisticModel m;
  m.weights[0] = 10;
  m.bias = -5;
  const auto samples = labeled(3, 5);
  const auto r = class_recall(m, samples);
  EXPECT_EQ(r.positives, 3u);
  EXPECT_EQ(r.negatives, 5u);
  EXPECT_EQ(r.positive, 1.0);
  EXPECT_EQ(r.negative, 1.0);
}

}  // namespace
}  // namespace authnorm
