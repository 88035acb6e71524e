#pragma once

#include <functional>
#include <string>
#include <vector>

#include "authnorm/nn/tensor.hpp"

namespace authnorm::nn {

struct GradCheckBlock {
  std::string name;
  double max_relative_error = 0.0;
  bool flagged = false;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_relative_error = 0.0;
  bool passed() const;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-4;
  /// Denominator floor: error = |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  /// Entries probed per block; 0 probes every entry.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
};

/// Compares analytic gradients against central differences.
///
/// `loss` must recompute the scalar loss from the current parameter values.
/// `analytic` must leave dL/dparam in each parameter's grad (it is called
/// once, on zeroed gradients). Throws NumericError on a non-finite loss.
GradCheckReport grad_check(const ParameterList& params, const std::function<double()>& loss,
                           const std::function<void()>& analytic, GradCheckOptions options = {});

}  // namespace authnorm::nn
