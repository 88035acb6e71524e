#include "authnorm/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace authnorm::nn {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

MatrixMap Tensor::matrix() {
  const auto rows = shape_.size() <= 1 ? std::size_t{1} : shape_[0];
  return MatrixMap(data_.data(), static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(rows == 0 ? 0 : data_.size() / rows));
}

ConstMatrixMap Tensor::matrix() const {
  const auto rows = shape_.size() <= 1 ? std::size_t{1} : shape_[0];
  return ConstMatrixMap(data_.data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(rows == 0 ? 0 : data_.size() / rows));
}

RowVectorMap Tensor::row_vector() {
  return RowVectorMap(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

ConstRowVectorMap Tensor::row_vector() const {
  return ConstRowVectorMap(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (auto& x : t.data()) x = rng.uniform(-k, k);
}

void zero_gradients(const ParameterList& params) {
  for (auto* p : params) p->grad.fill(0.0);
}

void add_column_sums(const Matrix& m, Tensor& out) {
  auto acc = out.row_vector();
  for (Eigen::Index r = 0; r < m.rows(); ++r) acc += m.row(r);
}

TokenBatch TokenBatch::from_sequences(std::span<const CharSequence> seqs) {
  TokenBatch batch;
  for (const auto& s : seqs) batch.steps = std::max(batch.steps, s.length);
  batch.ids.assign(seqs.size() * batch.steps, alphabet::kPad);
  batch.lengths.reserve(seqs.size());
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    for (std::size_t t = 0; t < seqs[b].length; ++t) {
      batch.ids[b * batch.steps + t] = seqs[b].ids[t];
    }
    batch.lengths.push_back(static_cast<int>(seqs[b].length));
  }
  return batch;
}

TokenBatch TokenBatch::from_ids(std::span<const std::vector<int>> rows) {
  TokenBatch batch;
  for (const auto& r : rows) batch.steps = std::max(batch.steps, r.size());
  batch.ids.assign(rows.size() * batch.steps, alphabet::kPad);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    std::copy(rows[b].begin(), rows[b].end(), batch.ids.begin() + b * batch.steps);
    batch.lengths.push_back(static_cast<int>(rows[b].size()));
  }
  return batch;
}

}  // namespace authnorm::nn
