#pragma once

#include <cstdint>

#include "authnorm/nn/tensor.hpp"

namespace authnorm::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState(const ParameterList& params, AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  std::int64_t step() const { return step_; }
  const std::vector<Tensor>& first_moment() const { return m_; }
  const std::vector<Tensor>& second_moment() const { return v_; }

  /// Bias-corrected Adam update from each parameter's grad.
  void apply(const ParameterList& params);

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t step_ = 0;
};

inline void adam_step(const ParameterList& params, AdamState& state) { state.apply(params); }

}  // namespace authnorm::nn
