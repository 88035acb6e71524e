#pragma once

#include "authnorm/nn/tensor.hpp"

namespace authnorm::nn {

/// One LSTM direction. Gates are fused column-wise in the order
/// input, forget, cell candidate, output: weights are E x 4H and H x 4H.
struct LstmParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  Parameter w_input;
  Parameter w_hidden;
  Parameter bias;

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input, std::size_t hidden);
  /// Uniform weights, zero biases, forget-gate bias 1.
  void init(Rng& rng);
  ParameterList parameters() { return {&w_input, &w_hidden, &bias}; }
};

struct LstmState {
  Matrix h;  // B x H
  Matrix c;  // B x H
};

/// Activations kept for backpropagation through time. Rows are stored in
/// length-sorted order so the active rows of each step form a prefix; the
/// per-step blocks are stacked in processing order starting at `offset`.
struct LstmCache {
  struct Step {
    int time = 0;
    int active = 0;
    Eigen::Index offset = 0;
  };
  std::vector<int> order;  // sorted position -> batch row
  bool reverse = false;
  std::vector<int> lengths;  // of the input sequence
  std::size_t time = 0;
  std::vector<Step> steps;
  Matrix inputs;  // stacked x rows
  Matrix h_prev, c_prev;
  Matrix gates;   // activated i, f, g, o
  Matrix tanh_c;  // tanh of the new cell state
};

struct LstmOutput {
  Sequence hidden;  // B x H per step; zero at padded positions
  Matrix h_final;
  Matrix c_final;
};

/// Standard LSTM without peepholes. Padded positions neither update the
/// state nor emit output, so with reverse=true each row starts at its own
/// last real character.
LstmOutput lstm_forward(const Sequence& x, const LstmParams& p, bool reverse,
                        LstmCache* cache, const LstmState* initial = nullptr);

struct LstmInputGrads {
  Sequence dx;
  Matrix dh0;
  Matrix dc0;
};

/// d_hidden may be null when only the final state feeds the loss.
LstmInputGrads lstm_backward(const LstmCache& cache, LstmParams& p, const Sequence* d_hidden,
                             const Matrix& dh_final, const Matrix& dc_final);

/// Single cell step for all rows, used by incremental decoding.
LstmState lstm_cell(const Matrix& x, const LstmState& state, const LstmParams& p);

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  BiLstmParams() = default;
  BiLstmParams(const std::string& prefix, std::size_t input, std::size_t hidden);
  void init(Rng& rng);
  ParameterList parameters();
};

struct BiLstmCache {
  LstmCache forward;
  LstmCache backward;
};

struct BiLstmOutput {
  Sequence hidden;  // B x 2H per step (empty unless requested)
  Matrix h_final;   // [forward final | backward final], B x 2H
  Matrix c_final;
};

BiLstmOutput bilstm_forward(const Sequence& x, const BiLstmParams& p, BiLstmCache* cache,
                            bool keep_sequence = true);

/// Returns dL/dx summed over both directions.
Sequence bilstm_backward(const BiLstmCache& cache, BiLstmParams& p, const Sequence* d_hidden,
                         const Matrix& dh_final, const Matrix& dc_final);

}  // namespace authnorm::nn
