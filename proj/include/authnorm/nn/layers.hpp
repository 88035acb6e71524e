#pragma once

#include "authnorm/nn/tensor.hpp"

namespace authnorm::nn {

// Embedding lookup: steps[t].row(b) = table.row(ids(b, t)).
// Throws ValidationError for ids outside the table.
Sequence embedding_forward(const TokenBatch& ids, const Tensor& table);
// Scatter-adds grad rows into the table gradient, including PAD rows.
void embedding_backward(const TokenBatch& ids, const Sequence& grad, Tensor& table_grad);

struct DenseParams {
  Parameter weight;  // in x out
  Parameter bias;    // out

  DenseParams() = default;
  DenseParams(const std::string& prefix, std::size_t in, std::size_t out);
  void init(Rng& rng);
  ParameterList parameters() { return {&weight, &bias}; }
};

Matrix dense_forward(const Matrix& x, const DenseParams& p);
/// Accumulates weight and bias gradients; returns dL/dx.
Matrix dense_backward(const Matrix& x, const Matrix& dy, DenseParams& p);

/// u.v / (|u||v|). A zero-norm input yields 0 with zero gradients. When
/// du/dv are given they receive ds/du and ds/dv.
double cosine_similarity(const Eigen::Ref<const RowVector>& u,
                         const Eigen::Ref<const RowVector>& v,
                         RowVector* du = nullptr, RowVector* dv = nullptr);

struct LossAndGrad {
  double loss = 0.0;
  double grad = 0.0;  // dL/d(similarity)
};

/// Similarity form: y (1 - s)^2 + (1 - y) max(0, s - margin)^2.
LossAndGrad contrastive_loss(double similarity, int label, double margin);

/// Mean of -log softmax(logits)[target] over positions t < lengths[b].
/// logits[t] is B x V; targets holds the class ids. Fills dlogits (same
/// layout as logits) when non-null.
double softmax_cross_entropy(const std::vector<Matrix>& logits, const TokenBatch& targets,
                             std::vector<Matrix>* dlogits);

/// Row-wise log-softmax.
Matrix log_softmax(const Matrix& logits);

/// Clamps every gradient component into [-clip, clip].
void clip_gradients(const ParameterList& params, double clip);

}  // namespace authnorm::nn
