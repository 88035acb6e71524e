#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "authnorm/ann_index.hpp"
#include "authnorm/error.hpp"
#include "authnorm/nn/container.hpp"
#include "authnorm/rng.hpp"
#include "test_util.hpp"

namespace authnorm {
namespace {

std::vector<double> gaussian_vector(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  for (auto& x : v) {
    // Box-Muller keeps directions uniform on the sphere.
    const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  return v;
}

std::vector<IndexItem> random_items(std::size_t n, std::size_t dim, Rng& rng) {
  std::vector<IndexItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    items.push_back({i, gaussian_vector(dim, rng), "item" + std::to_string(i)});
  }
  return items;
}

// Brute-force oracle independent of the library helpers.
std::size_t nearest_oracle(const std::vector<IndexItem>& items, const std::vector<double>& q) {
  double best = -2;
  std::size_t arg = 0;
  double qn = 0;
  for (double x : q) qn += x * x;
  for (const auto& it : items) {
    double dot = 0, n = 0;
    for (std::size_t d = 0; d < q.size(); ++d) {
      dot += it.vector[d] * q[d];
      n += it.vector[d] * it.vector[d];
    }
    const double cos = dot / std::sqrt(n * qn);
    if (cos > best) {
      best = cos;
      arg = it.id;
    }
  }
  return arg;
}

TEST(RpForest, SmallInputGivesSingleLeafTrees) {
  Rng rng(1);
  const auto items = random_items(16, 8, rng);
  const auto index = RpForestIndex::build(items, {4, 16, 3});
  ASSERT_EQ(index.trees().size(), 4u);
  for (const auto& tree : index.trees()) {
    ASSERT_EQ(tree.size(), 1u);
    EXPECT_TRUE(tree[0].is_leaf());
    EXPECT_EQ(tree[0].members.size(), 16u);
  }
}

TEST(RpForest, LeavesRespectCapacityAndPartitionItems) {
  Rng rng(2);
  const auto items = random_items(500, 16, rng);
  const auto index = RpForestIndex::build(items, {5, 10, 9});
  for (const auto& tree : index.trees()) {
    std::vector<int> seen(items.size(), 0);
    for (const auto& node : tree) {
      if (!node.is_leaf()) continue;
      EXPECT_LE(node.members.size(), 10u);
      for (auto m : node.members) ++seen[m];
    }
    for (int s : seen) EXPECT_EQ(s, 1);
  }
}

TEST(RpForest, SameSeedSameStructure) {
  Rng rng(3);
  const auto items = random_items(300, 12, rng);
  const auto a = RpForestIndex::build(items, {4, 8, 42});
  const auto b = RpForestIndex::build(items, {4, 8, 42});
  EXPECT_EQ(a.serialize(), b.serialize());
  const auto c = RpForestIndex::build(items, {4, 8, 43});
  EXPECT_NE(a.serialize(), c.serialize());
}

TEST(RpForest, IndexedVectorFindsItself) {
  Rng rng(4);
  const auto items = random_items(400, 10, rng);
  const auto index = RpForestIndex::build(items, {8, 16, 1});
  for (std::size_t i = 0; i < items.size(); i += 37) {
    const auto res = index.query(items[i].vector, 1, items.size());
    ASSERT_EQ(res.size(), 1u);
    EXPECT_EQ(res[0].id, items[i].id);
    EXPECT_NEAR(res[0].distance, 0.0, 1e-12);
    EXPECT_EQ(res[0].payload, items[i].payload);
  }
}

TEST(RpForest, LargeKReturnsEverything) {
  Rng rng(5);
  const auto items = random_items(20, 4, rng);
  const auto index = RpForestIndex::build(items, {3, 4, 1});
  EXPECT_EQ(index.query(items[0].vector, 50).size(), 20u);
}

TEST(RpForest, FullBudgetMatchesExactSearch) {
  Rng rng(6);
  const auto items = random_items(600, 12, rng);
  const auto index = RpForestIndex::build(items, {6, 16, 2});
  for (int probe = 0; probe < 100; ++probe) {
    const auto q = gaussian_vector(12, rng);
    const auto got = index.query(q, 5, items.size());
    const auto want = exact_knn(items, q, 5);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, want[i].id);
      EXPECT_DOUBLE_EQ(got[i].distance, want[i].distance);
    }
    EXPECT_EQ(want[0].id, nearest_oracle(items, q));
  }
}

TEST(RpForest, ResultsAscendByDistance) {
  Rng rng(7);
  const auto items = random_items(300, 6, rng);
  const auto index = RpForestIndex::build(items, {4, 8, 2});
  for (int probe = 0; probe < 50; ++probe) {
    const auto res = index.query(gaussian_vector(6, rng), 10);
    for (std::size_t i = 1; i < res.size(); ++i) EXPECT_LE(res[i - 1].distance, res[i].distance);
  }
}

TEST(ExactKnn, OneItemAndBasis) {
  std::vector<IndexItem> one{{7, {1, 2}, "x"}};
  std::vector<double> q{3, -1};
  ASSERT_EQ(exact_knn(one, q, 3).size(), 1u);
  EXPECT_EQ(exact_knn(one, q, 3)[0].id, 7u);

  std::vector<IndexItem> basis;
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> e(4, 0.0);
    e[i] = 1.0;
    basis.push_back({i, e, ""});
  }
  const auto res = exact_knn(basis, basis[0].vector, 4);
  EXPECT_EQ(res[0].id, 0u);
  EXPECT_EQ(res[0].distance, 0.0);
  // The three orthogonal items tie at distance 1 and come out by id.
  EXPECT_EQ(res[1].id, 1u);
  EXPECT_EQ(res[3].id, 3u);
  EXPECT_EQ(res[3].distance, 1.0);
}

TEST(RpForest, SaveLoadRoundTrip) {
  Rng rng(8);
  const auto items = random_items(500, 16, rng);
  const auto index = RpForestIndex::build(items, {8, 16, 5});
  test::TempDir dir;
  index.save(dir.path() / "i.annx");
  const auto back = RpForestIndex::load(dir.path() / "i.annx");
  for (int probe = 0; probe < 100; ++probe) {
    const auto q = gaussian_vector(16, rng);
    const auto a = index.query(q, 3), b = back.query(q, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].id, b[i].id);
      EXPECT_EQ(a[i].payload, b[i].payload);
      EXPECT_EQ(a[i].distance, b[i].distance);
    }
  }
}

TEST(RpForest, CorruptFilesAreRejected) {
  Rng rng(9);
  const auto index = RpForestIndex::build(random_items(50, 4, rng), {2, 8, 1});
  auto bytes = index.serialize();
  auto truncated = bytes;
  truncated.resize(truncated.size() / 2);
  EXPECT_THROW(RpForestIndex::deserialize(truncated), FormatError);
  bytes[4] += 1;
  try {
    RpForestIndex::deserialize(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(RpForest, InvalidInput) {
  EXPECT_THROW(RpForestIndex::build({}, {}), ValidationError);
  std::vector<IndexItem> mixed{{0, {1, 2}, ""}, {1, {1, 2, 3}, ""}};
  EXPECT_THROW(RpForestIndex::build(mixed, {}), ValidationError);
}

}  // namespace
}  // namespace authnorm
