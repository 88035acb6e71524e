#include "authnorm/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "authnorm/error.hpp"

namespace authnorm::nn {

bool GradCheckReport::passed() const {
  return std::none_of(blocks.begin(), blocks.end(),
                      [](const GradCheckBlock& b) { return b.flagged; });
}

GradCheckReport grad_check(const ParameterList& params, const std::function<double()>& loss,
                           const std::function<void()>& analytic, GradCheckOptions options) {
  zero_gradients(params);
  analytic();
  std::vector<Tensor> analytic_grads;
  for (const auto* p : params) analytic_grads.push_back(p->grad);

  auto eval = [&] {
    const double l = loss();
    if (!std::isfinite(l)) throw NumericError("grad_check: non-finite loss");
    return l;
  };

  Rng rng(options.seed);
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k]->value.data();
    std::vector<std::size_t> probe(values.size());
    std::iota(probe.begin(), probe.end(), std::size_t{0});
    if (options.max_entries > 0 && probe.size() > options.max_entries) {
      rng.shuffle(probe);
      probe.resize(options.max_entries);
      std::sort(probe.begin(), probe.end());
    }
    GradCheckBlock block;
    block.name = params[k]->name;
    for (std::size_t i : probe) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double up = eval();
      values[i] = saved - options.step;
      const double down = eval();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic_grads[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      block.max_relative_error = std::max(block.max_relative_error, std::abs(a - numeric) / denom);
    }
    block.flagged = block.max_relative_error > options.tolerance;
    report.max_relative_error = std::max(report.max_relative_error, block.max_relative_error);
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace authnorm::nn
