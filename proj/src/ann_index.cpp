#include "authnorm/ann_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "authnorm/error.hpp"
#include "authnorm/nn/container.hpp"
#include "authnorm/rng.hpp"

namespace authnorm {

namespace {

constexpr char kIndexMagic[4] = {'A', 'N', 'N', 'X'};
constexpr int kSplitAttempts = 8;

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

bool is_zero(const double* a, std::size_t n) {
  return std::all_of(a, a + n, [](double x) { return x == 0.0; });
}

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return std::tie(a.distance, a.id) < std::tie(b.distance, b.id);
}

}  // namespace

std::vector<double> unit_vector(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  const double norm = std::sqrt(dot(out.data(), out.data(), out.size()));
  if (norm > 0.0) {
    for (auto& x : out) x /= norm;
  }
  return out;
}

double unit_cosine_distance(const double* a, const double* b, std::size_t dim) {
  if (is_zero(a, dim) || is_zero(b, dim)) return 1.0;
  return 1.0 - dot(a, b, dim);
}

RpForestIndex RpForestIndex::build(std::vector<IndexItem> items, AnnParams params) {
  if (items.empty()) throw ValidationError("ann index: no items");
  if (params.n_trees == 0 || params.leaf_capacity == 0) {
    throw ValidationError("ann index: n_trees and leaf_capacity must be positive");
  }
  RpForestIndex index;
  index.params_ = params;
  index.dim_ = items.front().vector.size();
  for (const auto& it : items) {
    if (it.vector.size() != index.dim_) throw ValidationError("ann index: dimension mismatch");
  }
  index.units_.reserve(items.size() * index.dim_);
  for (auto& it : items) {
    const auto u = unit_vector(it.vector);
    index.units_.insert(index.units_.end(), u.begin(), u.end());
    index.ids_.push_back(it.id);
    index.payloads_.push_back(std::move(it.payload));
  }

  const std::size_t dim = index.dim_;
  for (std::size_t tree_no = 0; tree_no < params.n_trees; ++tree_no) {
    Rng rng(derive_seed(params.seed, "ann.tree", tree_no));
    Tree tree;
    std::vector<std::uint32_t> all(index.ids_.size());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    tree.push_back(Node{});
    std::vector<std::pair<std::int32_t, std::vector<std::uint32_t>>> pending;
    pending.emplace_back(0, std::move(all));
    while (!pending.empty()) {
      auto [node_id, members] = std::move(pending.back());
      pending.pop_back();
      bool split = false;
      if (members.size() > params.leaf_capacity) {
        for (int attempt = 0; attempt < kSplitAttempts && !split; ++attempt) {
          const std::size_t a = rng.below(members.size());
          std::size_t b = rng.below(members.size() - 1);
          if (b >= a) ++b;
          const double* va = index.unit(members[a]);
          const double* vb = index.unit(members[b]);
          std::vector<double> normal(dim);
          for (std::size_t d = 0; d < dim; ++d) normal[d] = va[d] - vb[d];
          if (is_zero(normal.data(), dim)) continue;
          // Bisector of a and b: points equidistant from both.
          double offset = 0.0;
          for (std::size_t d = 0; d < dim; ++d) offset += normal[d] * 0.5 * (va[d] + vb[d]);
          std::vector<std::uint32_t> left, right;
          for (auto m : members) {
            const double margin = dot(normal.data(), index.unit(m), dim) - offset;
            if (margin > 0.0 || (margin == 0.0 && (rng.next() & 1U))) {
              left.push_back(m);
            } else {
              right.push_back(m);
            }
          }
          if (left.empty() || right.empty()) continue;
          split = true;
          const auto left_id = static_cast<std::int32_t>(tree.size());
          tree.push_back(Node{});
          const auto right_id = static_cast<std::int32_t>(tree.size());
          tree.push_back(Node{});
          Node& node = tree[static_cast<std::size_t>(node_id)];
          node.left = left_id;
          node.right = right_id;
          node.offset = offset;
          node.normal = std::move(normal);
          pending.emplace_back(right_id, std::move(right));
          pending.emplace_back(left_id, std::move(left));
        }
      }
      if (!split) tree[static_cast<std::size_t>(node_id)].members = std::move(members);
    }
    index.trees_.push_back(std::move(tree));
  }
  return index;
}

std::vector<Neighbor> RpForestIndex::query(std::span<const double> q, std::size_t k,
                                           std::size_t search_budget) const {
  if (ids_.empty()) throw ValidationError("ann index: query on empty index");
  if (k == 0) throw ValidationError("ann index: k must be >= 1");
  if (q.size() != dim_) throw ValidationError("ann index: query dimension mismatch");
  if (search_budget == 0) search_budget = k * params_.n_trees * 32;
  const auto uq = unit_vector(q);

  // (priority, tree, node); larger priority first, then lower tree/node.
  using Entry = std::tuple<double, std::int64_t, std::int64_t>;
  std::priority_queue<Entry> heap;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    heap.emplace(std::numeric_limits<double>::infinity(), -static_cast<std::int64_t>(t), 0);
  }
  std::vector<char> seen(ids_.size(), 0);
  std::vector<std::uint32_t> candidates;
  while (!heap.empty() && candidates.size() < search_budget) {
    const auto [priority, neg_tree, node_id] = heap.top();
    heap.pop();
    const Node& node = trees_[static_cast<std::size_t>(-neg_tree)][static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) {
      for (auto m : node.members) {
        if (!seen[m]) {
          seen[m] = 1;
          candidates.push_back(m);
        }
      }
      continue;
    }
    const double margin = dot(node.normal.data(), uq.data(), dim_) - node.offset;
    heap.emplace(std::min(priority, margin), neg_tree, node.left);
    heap.emplace(std::min(priority, -margin), neg_tree, node.right);
  }

  std::vector<Neighbor> out;
  out.reserve(candidates.size());
  for (auto m : candidates) {
    out.push_back(Neighbor{ids_[m], payloads_[m], unit_cosine_distance(unit(m), uq.data(), dim_)});
  }
  const std::size_t keep = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(),
                    neighbor_less);
  out.resize(keep);
  return out;
}

std::vector<Neighbor> exact_knn(std::span<const IndexItem> items, std::span<const double> q,
                                std::size_t k) {
  const auto uq = unit_vector(q);
  std::vector<Neighbor> out;
  out.reserve(items.size());
  for (const auto& it : items) {
    if (it.vector.size() != uq.size()) throw ValidationError("exact_knn: dimension mismatch");
    const auto u = unit_vector(it.vector);
    out.push_back(Neighbor{it.id, it.payload, unit_cosine_distance(u.data(), uq.data(), uq.size())});
  }
  const std::size_t keep = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(),
                    neighbor_less);
  out.resize(keep);
  return out;
}

std::vector<std::uint8_t> RpForestIndex::serialize() const {
  nn::BinaryWriter w;
  w.raw(kIndexMagic, 4);
  w.u32(kFormatVersion);
  w.u64(params_.n_trees);
  w.u64(params_.leaf_capacity);
  w.u64(params_.seed);
  w.u64(dim_);
  w.u64(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    w.u64(ids_[i]);
    w.str(payloads_[i]);
    for (std::size_t d = 0; d < dim_; ++d) w.f64(unit(i)[d]);
  }
  w.u64(trees_.size());
  for (const auto& tree : trees_) {
    w.u64(tree.size());
    for (const auto& node : tree) {
      w.u32(static_cast<std::uint32_t>(node.left));
      w.u32(static_cast<std::uint32_t>(node.right));
      if (node.is_leaf()) {
        w.u64(node.members.size());
        for (auto m : node.members) w.u32(m);
      } else {
        w.f64(node.offset);
        for (double x : node.normal) w.f64(x);
      }
    }
  }
  return w.bytes();
}

RpForestIndex RpForestIndex::deserialize(std::vector<std::uint8_t> bytes) {
  nn::BinaryReader r(std::move(bytes));
  char magic[4];
  r.raw(magic, 4);
  if (!std::equal(magic, magic + 4, kIndexMagic)) throw FormatError("not an index file");
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw FormatError("incompatible index format version " + std::to_string(version) +
                      " (expected " + std::to_string(kFormatVersion) + ")");
  }
  RpForestIndex index;
  index.params_.n_trees = r.u64();
  index.params_.leaf_capacity = r.u64();
  index.params_.seed = r.u64();
  index.dim_ = r.u64();
  const auto n = r.u64();
  if (index.dim_ > (1u << 20) || n > (1u << 28)) throw FormatError("index header out of range");
  for (std::uint64_t i = 0; i < n; ++i) {
    index.ids_.push_back(r.u64());
    index.payloads_.push_back(r.str());
    for (std::size_t d = 0; d < index.dim_; ++d) index.units_.push_back(r.f64());
  }
  const auto n_trees = r.u64();
  for (std::uint64_t t = 0; t < n_trees; ++t) {
    const auto n_nodes = r.u64();
    if (n_nodes > 4 * n + 1) throw FormatError("index tree size out of range");
    Tree tree(n_nodes);
    for (auto& node : tree) {
      node.left = static_cast<std::int32_t>(r.u32());
      node.right = static_cast<std::int32_t>(r.u32());
      if (node.is_leaf()) {
        node.members.resize(r.u64());
        for (auto& m : node.members) {
          m = r.u32();
          if (m >= n) throw FormatError("index leaf member out of range");
        }
      } else {
        if (node.left >= static_cast<std::int32_t>(tree.size()) ||
            node.right >= static_cast<std::int32_t>(tree.size())) {
          throw FormatError("index node child out of range");
        }
        node.offset = r.f64();
        node.normal.resize(index.dim_);
        for (auto& x : node.normal) x = r.f64();
      }
    }
    index.trees_.push_back(std::move(tree));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after index");
  return index;
}

void RpForestIndex::save(const std::filesystem::path& path) const {
  nn::write_file(path, serialize());
}

RpForestIndex RpForestIndex::load(const std::filesystem::path& path) {
  return deserialize(nn::read_file(path));
}

}  // namespace authnorm
