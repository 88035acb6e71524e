#include "authnorm/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "authnorm/error.hpp"

namespace authnorm::nn {

Sequence embedding_forward(const TokenBatch& ids, const Tensor& table) {
  const auto table_m = table.matrix();
  const auto vocab = static_cast<int>(table_m.rows());
  Sequence out;
  out.lengths = ids.lengths;
  out.steps.assign(ids.steps, Matrix(ids.batch(), table_m.cols()));
  for (std::size_t t = 0; t < ids.steps; ++t) {
    for (std::size_t b = 0; b < ids.batch(); ++b) {
      const int id = ids.at(b, t);
      if (id < 0 || id >= vocab) {
        throw ValidationError("embedding: id " + std::to_string(id) +
                              " out of range for vocabulary of " + std::to_string(vocab));
      }
      out.steps[t].row(static_cast<Eigen::Index>(b)) = table_m.row(id);
    }
  }
  return out;
}

void embedding_backward(const TokenBatch& ids, const Sequence& grad, Tensor& table_grad) {
  auto g = table_grad.matrix();
  for (std::size_t t = 0; t < ids.steps; ++t) {
    for (std::size_t b = 0; b < ids.batch(); ++b) {
      g.row(ids.at(b, t)) += grad.steps[t].row(static_cast<Eigen::Index>(b));
    }
  }
}

DenseParams::DenseParams(const std::string& prefix, std::size_t in, std::size_t out)
    : weight(prefix + ".weight", {in, out}), bias(prefix + ".bias", {out}) {}

void DenseParams::init(Rng& rng) {
  init_uniform(weight.value, weight.value.shape()[0], rng);
  bias.value.fill(0.0);
}

Matrix dense_forward(const Matrix& x, const DenseParams& p) {
  const auto w = p.weight.value.matrix();
  if (x.cols() != w.rows()) throw ValidationError("dense: input width mismatch");
  Matrix y = x * w;
  y.rowwise() += p.bias.value.row_vector();
  return y;
}

Matrix dense_backward(const Matrix& x, const Matrix& dy, DenseParams& p) {
  p.weight.grad.matrix().noalias() += x.transpose() * dy;
  add_column_sums(dy, p.bias.grad);
  return dy * p.weight.value.matrix().transpose();
}

double cosine_similarity(const Eigen::Ref<const RowVector>& u,
                         const Eigen::Ref<const RowVector>& v, RowVector* du, RowVector* dv) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    if (du) *du = RowVector::Zero(u.size());
    if (dv) *dv = RowVector::Zero(v.size());
    return 0.0;
  }
  const double s = u.dot(v) / (nu * nv);
  if (du) *du = v / (nu * nv) - s * u / (nu * nu);
  if (dv) *dv = u / (nu * nv) - s * v / (nv * nv);
  return s;
}

LossAndGrad contrastive_loss(double s, int label, double margin) {
  if (label == 1) return {(1.0 - s) * (1.0 - s), -2.0 * (1.0 - s)};
  if (s <= margin) return {0.0, 0.0};
  return {(s - margin) * (s - margin), 2.0 * (s - margin)};
}

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

double softmax_cross_entropy(const std::vector<Matrix>& logits, const TokenBatch& targets,
                             std::vector<Matrix>* dlogits) {
  std::size_t count = 0;
  for (int len : targets.lengths) count += static_cast<std::size_t>(len);
  if (dlogits) {
    dlogits->clear();
    for (const auto& l : logits) dlogits->push_back(Matrix::Zero(l.rows(), l.cols()));
  }
  if (count == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(count);
  double total = 0.0;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    const auto vocab = logits[t].cols();
    for (std::size_t b = 0; b < targets.batch(); ++b) {
      if (static_cast<int>(t) >= targets.lengths[b]) continue;
      const int target = targets.at(b, t);
      if (target < 0 || target >= vocab) {
        throw ValidationError("cross-entropy: target id out of range");
      }
      const auto row = logits[t].row(static_cast<Eigen::Index>(b));
      const double mx = row.maxCoeff();
      const RowVector e = (row.array() - mx).exp();
      const double z = e.sum();
      total += -(row(target) - mx - std::log(z));
      if (dlogits) {
        auto d = (*dlogits)[t].row(static_cast<Eigen::Index>(b));
        d = e / z * scale;
        d(target) -= scale;
      }
    }
  }
  return total * scale;
}

void clip_gradients(const ParameterList& params, double clip) {
  for (auto* p : params) {
    for (auto& g : p->grad.data()) g = std::clamp(g, -clip, clip);
  }
}

}  // namespace authnorm::nn
