#include "authnorm/nn/lstm.hpp"

#include <algorithm>
#include <numeric>

#include "authnorm/error.hpp"

namespace authnorm::nn {

namespace {

using Eigen::Index;

template <typename Block>
void sigmoid_inplace(Block&& block) {
  block = (1.0 + (-block.array()).exp()).inverse().matrix();
}

// tanh(x) = 2 sigmoid(2x) - 1; Eigen's vectorized exp is much faster than
// its double tanh.
template <typename Block>
void tanh_inplace(Block&& block) {
  block = (2.0 / (1.0 + (-2.0 * block.array()).exp()) - 1.0).matrix();
}

std::vector<int> length_order(const std::vector<int>& lengths) {
  std::vector<int> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lengths[a] > lengths[b]; });
  return order;
}

// Number of rows (in sorted order) whose length exceeds t.
int active_rows(const std::vector<int>& order, const std::vector<int>& lengths, int t) {
  int n = 0;
  while (n < static_cast<int>(order.size()) && lengths[order[n]] > t) ++n;
  return n;
}

Matrix gather(const Matrix& m, const std::vector<int>& order, int n) {
  Matrix out(n, m.cols());
  for (int r = 0; r < n; ++r) out.row(r) = m.row(order[r]);
  return out;
}

// Applies gate activations to raw pre-activations z (n x 4H).
template <typename Block>
void activate(Block&& z, Index hidden) {
  sigmoid_inplace(z.leftCols(2 * hidden));
  tanh_inplace(z.middleCols(2 * hidden, hidden));
  sigmoid_inplace(z.rightCols(hidden));
}

}  // namespace

LstmParams::LstmParams(const std::string& prefix, std::size_t input, std::size_t hidden)
    : input_size(input),
      hidden_size(hidden),
      w_input(prefix + ".w_input", {input, 4 * hidden}),
      w_hidden(prefix + ".w_hidden", {hidden, 4 * hidden}),
      bias(prefix + ".bias", {4 * hidden}) {}

void LstmParams::init(Rng& rng) {
  init_uniform(w_input.value, input_size, rng);
  init_uniform(w_hidden.value, hidden_size, rng);
  bias.value.fill(0.0);
  for (std::size_t j = hidden_size; j < 2 * hidden_size; ++j) bias.value[j] = 1.0;
}

LstmOutput lstm_forward(const Sequence& x, const LstmParams& p, bool reverse, LstmCache* cache,
                        const LstmState* initial) {
  const auto batch = static_cast<Index>(x.batch());
  const auto hidden = static_cast<Index>(p.hidden_size);
  const auto input = static_cast<Index>(p.input_size);
  const int time = static_cast<int>(x.time());
  for (const auto& s : x.steps) {
    if (s.rows() != batch || s.cols() != input) {
      throw ValidationError("lstm: input shape mismatch");
    }
  }
  if (initial && (initial->h.rows() != batch || initial->h.cols() != hidden ||
                  initial->c.rows() != batch || initial->c.cols() != hidden)) {
    throw ValidationError("lstm: initial state shape mismatch");
  }

  const auto order = length_order(x.lengths);
  std::vector<LstmCache::Step> steps;
  Index total = 0;
  for (int s = 0; s < time; ++s) {
    const int t = reverse ? time - 1 - s : s;
    const int n = active_rows(order, x.lengths, t);
    if (n == 0) continue;
    steps.push_back({t, n, total});
    total += n;
  }

  // All input projections in one product.
  Matrix inputs(total, input);
  for (const auto& st : steps) {
    for (int r = 0; r < st.active; ++r) inputs.row(st.offset + r) = x.steps[st.time].row(order[r]);
  }
  Matrix gates(total, 4 * hidden);
  gates.noalias() = inputs * p.w_input.value.matrix();
  gates.rowwise() += p.bias.value.row_vector();

  Matrix h = initial ? gather(initial->h, order, static_cast<int>(batch)) : Matrix::Zero(batch, hidden);
  Matrix c = initial ? gather(initial->c, order, static_cast<int>(batch)) : Matrix::Zero(batch, hidden);
  const auto wh = p.w_hidden.value.matrix();

  Matrix h_prev, c_prev, tanh_c(total, hidden);
  if (cache) {
    h_prev.resize(total, hidden);
    c_prev.resize(total, hidden);
  }

  LstmOutput out;
  out.hidden.lengths = x.lengths;
  out.hidden.steps.assign(time, Matrix::Zero(batch, hidden));

  for (const auto& st : steps) {
    const int n = st.active;
    auto z = gates.middleRows(st.offset, n);
    z.noalias() += h.topRows(n) * wh;
    activate(z, hidden);
    if (cache) {
      h_prev.middleRows(st.offset, n) = h.topRows(n);
      c_prev.middleRows(st.offset, n) = c.topRows(n);
    }
    c.topRows(n).array() = z.middleCols(hidden, hidden).array() * c.topRows(n).array() +
                           z.leftCols(hidden).array() * z.middleCols(2 * hidden, hidden).array();
    auto tc = tanh_c.middleRows(st.offset, n);
    tc = c.topRows(n);
    tanh_inplace(tc);
    h.topRows(n).array() = z.rightCols(hidden).array() * tc.array();
    auto& dest = out.hidden.steps[st.time];
    for (int r = 0; r < n; ++r) dest.row(order[r]) = h.row(r);
  }

  out.h_final.resize(batch, hidden);
  out.c_final.resize(batch, hidden);
  for (Index r = 0; r < batch; ++r) {
    out.h_final.row(order[r]) = h.row(r);
    out.c_final.row(order[r]) = c.row(r);
  }
  if (cache) {
    cache->order = order;
    cache->reverse = reverse;
    cache->lengths = x.lengths;
    cache->time = x.time();
    cache->steps = std::move(steps);
    cache->inputs = std::move(inputs);
    cache->h_prev = std::move(h_prev);
    cache->c_prev = std::move(c_prev);
    cache->gates = std::move(gates);
    cache->tanh_c = std::move(tanh_c);
  }
  return out;
}

LstmInputGrads lstm_backward(const LstmCache& cache, LstmParams& p, const Sequence* d_hidden,
                             const Matrix& dh_final, const Matrix& dc_final) {
  const auto batch = static_cast<Index>(cache.lengths.size());
  const auto hidden = static_cast<Index>(p.hidden_size);
  const auto& order = cache.order;
  const Index total = cache.gates.rows();

  Matrix dh = gather(dh_final, order, static_cast<int>(batch));
  Matrix dc = gather(dc_final, order, static_cast<int>(batch));
  const auto wh = p.w_hidden.value.matrix();

  using RowArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix dz_all(total, 4 * hidden);
  for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
    const auto& st = *it;
    const int n = st.active;
    if (d_hidden) {
      if (static_cast<std::size_t>(st.time) >= d_hidden->time()) throw ValidationError("lstm: d_hidden too short");
      const auto& src = d_hidden->steps[st.time];
      for (int r = 0; r < n; ++r) dh.row(r) += src.row(order[r]);
    }
    const auto gates = cache.gates.middleRows(st.offset, n);
    const auto i = gates.leftCols(hidden).array();
    const auto f = gates.middleCols(hidden, hidden).array();
    const auto g = gates.middleCols(2 * hidden, hidden).array();
    const auto o = gates.rightCols(hidden).array();
    const auto tc = cache.tanh_c.middleRows(st.offset, n).array();
    const auto dh_n = dh.topRows(n).array();

    const RowArray dcell = dc.topRows(n).array() + dh_n * o * (1.0 - tc * tc);
    auto dz = dz_all.middleRows(st.offset, n);
    dz.leftCols(hidden) = (dcell * g * i * (1.0 - i)).matrix();
    dz.middleCols(hidden, hidden) =
        (dcell * cache.c_prev.middleRows(st.offset, n).array() * f * (1.0 - f)).matrix();
    dz.middleCols(2 * hidden, hidden) = (dcell * i * (1.0 - g * g)).matrix();
    dz.rightCols(hidden) = (dh_n * tc * o * (1.0 - o)).matrix();

    dh.topRows(n).noalias() = dz * wh.transpose();
    dc.topRows(n) = (dcell * f).matrix();
  }

  // Weight gradients and input gradients in one product each.
  p.w_input.grad.matrix().noalias() += cache.inputs.transpose() * dz_all;
  p.w_hidden.grad.matrix().noalias() += cache.h_prev.transpose() * dz_all;
  add_column_sums(dz_all, p.bias.grad);
  const Matrix dx_all = dz_all * p.w_input.value.matrix().transpose();

  LstmInputGrads grads;
  grads.dx.lengths = cache.lengths;
  grads.dx.steps.assign(cache.time, Matrix::Zero(batch, cache.inputs.cols()));
  for (const auto& st : cache.steps) {
    auto& dest = grads.dx.steps[st.time];
    for (int r = 0; r < st.active; ++r) dest.row(order[r]) = dx_all.row(st.offset + r);
  }

  grads.dh0.resize(batch, hidden);
  grads.dc0.resize(batch, hidden);
  for (Index r = 0; r < batch; ++r) {
    grads.dh0.row(order[r]) = dh.row(r);
    grads.dc0.row(order[r]) = dc.row(r);
  }
  return grads;
}

LstmState lstm_cell(const Matrix& x, const LstmState& state, const LstmParams& p) {
  const auto hidden = static_cast<Index>(p.hidden_size);
  Matrix z = x * p.w_input.value.matrix();
  z.noalias() += state.h * p.w_hidden.value.matrix();
  z.rowwise() += p.bias.value.row_vector();
  activate(z, hidden);
  LstmState next;
  next.c = (z.middleCols(hidden, hidden).array() * state.c.array() +
            z.leftCols(hidden).array() * z.middleCols(2 * hidden, hidden).array())
               .matrix();
  Matrix tanh_c = next.c;
  tanh_inplace(tanh_c);
  next.h = (z.rightCols(hidden).array() * tanh_c.array()).matrix();
  return next;
}

BiLstmParams::BiLstmParams(const std::string& prefix, std::size_t input, std::size_t hidden)
    : forward(prefix + ".fwd", input, hidden), backward(prefix + ".bwd", input, hidden) {}

void BiLstmParams::init(Rng& rng) {
  forward.init(rng);
  backward.init(rng);
}

ParameterList BiLstmParams::parameters() {
  ParameterList out = forward.parameters();
  for (auto* q : backward.parameters()) out.push_back(q);
  return out;
}

BiLstmOutput bilstm_forward(const Sequence& x, const BiLstmParams& p, BiLstmCache* cache,
                            bool keep_sequence) {
  const auto hidden = static_cast<Index>(p.forward.hidden_size);
  auto fwd = lstm_forward(x, p.forward, false, cache ? &cache->forward : nullptr);
  auto bwd = lstm_forward(x, p.backward, true, cache ? &cache->backward : nullptr);
  BiLstmOutput out;
  if (keep_sequence) {
    out.hidden.lengths = x.lengths;
    out.hidden.steps.reserve(x.time());
    for (std::size_t t = 0; t < x.time(); ++t) {
      Matrix m(static_cast<Index>(x.batch()), 2 * hidden);
      m << fwd.hidden.steps[t], bwd.hidden.steps[t];
      out.hidden.steps.push_back(std::move(m));
    }
  }
  out.h_final.resize(static_cast<Index>(x.batch()), 2 * hidden);
  out.h_final << fwd.h_final, bwd.h_final;
  out.c_final.resize(static_cast<Index>(x.batch()), 2 * hidden);
  out.c_final << fwd.c_final, bwd.c_final;
  return out;
}

Sequence bilstm_backward(const BiLstmCache& cache, BiLstmParams& p, const Sequence* d_hidden,
                         const Matrix& dh_final, const Matrix& dc_final) {
  const auto hidden = static_cast<Index>(p.forward.hidden_size);
  Sequence d_fwd, d_bwd;
  if (d_hidden) {
    d_fwd.lengths = d_bwd.lengths = d_hidden->lengths;
    for (const auto& m : d_hidden->steps) {
      d_fwd.steps.push_back(m.leftCols(hidden));
      d_bwd.steps.push_back(m.rightCols(hidden));
    }
  }
  auto gf = lstm_backward(cache.forward, p.forward, d_hidden ? &d_fwd : nullptr,
                          dh_final.leftCols(hidden), dc_final.leftCols(hidden));
  auto gb = lstm_backward(cache.backward, p.backward, d_hidden ? &d_bwd : nullptr,
                          dh_final.rightCols(hidden), dc_final.rightCols(hidden));
  for (std::size_t t = 0; t < gf.dx.time(); ++t) gf.dx.steps[t] += gb.dx.steps[t];
  return std::move(gf.dx);
}

}  // namespace authnorm::nn
