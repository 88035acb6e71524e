#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace authnorm {

struct IndexItem {
  std::size_t id = 0;
  std::vector<double> vector;
  std::string payload;
};

struct Neighbor {
  std::size_t id = 0;
  std::string payload;
  double distance = 0.0;  // cosine distance, 1 - cos
};

struct AnnParams {
  std::size_t n_trees = 16;
  std::size_t leaf_capacity = 16;
  std::uint64_t seed = 0;
};

/// Random-projection forest for cosine distance. Vectors are normalized on
/// insertion; each internal node splits by the perpendicular bisector of two
/// random members. Immutable once built.
class RpForestIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  struct Node {
    std::int32_t left = -1;   // children; -1 for leaves
    std::int32_t right = -1;
    double offset = 0.0;
    std::vector<double> normal;         // empty for leaves
    std::vector<std::uint32_t> members; // item positions, leaves only
    bool is_leaf() const { return left < 0; }
  };
  using Tree = std::vector<Node>;  // root at index 0

  /// Throws ValidationError on an empty item list or mixed dimensions.
  static RpForestIndex build(std::vector<IndexItem> items, AnnParams params = {});

  /// Best-first traversal of all trees until at least search_budget
  /// candidates are collected, then exact re-ranking. A budget of 0 means
  /// k * n_trees * 32. Results ascend by distance, ties by item id.
  std::vector<Neighbor> query(std::span<const double> q, std::size_t k,
                              std::size_t search_budget = 0) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dim_; }
  const AnnParams& params() const { return params_; }
  const std::vector<Tree>& trees() const { return trees_; }

  void save(const std::filesystem::path& path) const;
  /// Throws FormatError for truncated files or a different format version.
  static RpForestIndex load(const std::filesystem::path& path);

  std::vector<std::uint8_t> serialize() const;
  static RpForestIndex deserialize(std::vector<std::uint8_t> bytes);

 private:
  const double* unit(std::size_t pos) const { return units_.data() + pos * dim_; }

  AnnParams params_;
  std::size_t dim_ = 0;
  std::vector<std::size_t> ids_;
  std::vector<std::string> payloads_;
  std::vector<double> units_;  // normalized vectors, row-major
  std::vector<Tree> trees_;
};

/// Exhaustive scan with the same distance and tie-breaking as query().
std::vector<Neighbor> exact_knn(std::span<const IndexItem> items, std::span<const double> q,
                                std::size_t k);

/// Normalized copy; zero vectors stay zero.
std::vector<double> unit_vector(std::span<const double> v);

/// 1 - a.b for unit vectors a and b (1 when either is zero).
double unit_cosine_distance(const double* a, const double* b, std::size_t dim);

}  // namespace authnorm
