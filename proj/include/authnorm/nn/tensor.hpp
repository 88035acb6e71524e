#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "authnorm/rng.hpp"
#include "authnorm/textnorm.hpp"

namespace authnorm::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using RowVectorMap = Eigen::Map<RowVector>;
using ConstRowVectorMap = Eigen::Map<const RowVector>;

/// Dense row-major array of doubles with an explicit shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// First dimension as rows, remaining dimensions flattened into columns.
  /// A 1-D tensor views as a single row.
  MatrixMap matrix();
  ConstMatrixMap matrix() const;
  RowVectorMap row_vector();
  ConstRowVectorMap row_vector() const;

  void fill(double v);
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// A trainable tensor and its gradient accumulator.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, std::vector<std::size_t> shape)
      : name(std::move(name)), value(shape), grad(shape) {}

  std::string name;
  Tensor value;
  Tensor grad;
};

using ParameterList = std::vector<Parameter*>;

/// uniform(-k, k) with k = 1/sqrt(fan_in).
void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng);

void zero_gradients(const ParameterList& params);

/// out += column sums of m, accumulated row by row so the result does not
/// depend on memory alignment.
void add_column_sums(const Matrix& m, Tensor& out);

/// Time-major batch: steps[t] is B x F. Row b of steps[t] is padding when
/// t >= lengths[b].
struct Sequence {
  std::vector<Matrix> steps;
  std::vector<int> lengths;

  std::size_t batch() const { return lengths.size(); }
  std::size_t time() const { return steps.size(); }
};

/// Batch of id sequences, row-major B x steps, with per-row lengths.
struct TokenBatch {
  std::size_t steps = 0;
  std::vector<int> ids;
  std::vector<int> lengths;

  std::size_t batch() const { return lengths.size(); }
  int at(std::size_t b, std::size_t t) const { return ids[b * steps + t]; }

  /// Packs fixed-length char sequences, truncating to the longest length.
  static TokenBatch from_sequences(std::span<const CharSequence> seqs);
  /// Packs arbitrary id lists; ids beyond a row's length are PAD.
  static TokenBatch from_ids(std::span<const std::vector<int>> rows);
};

}  // namespace authnorm::nn
