#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "authnorm/nn/grad_check.hpp"

namespace authnorm {

/// Finite-difference checks of every layer and both models at toy sizes
/// (batch <= 2, steps <= 4, hidden <= 8), with random inputs and random
/// upstream gradients drawn from `seed`.
struct NamedGradCheck {
  std::string name;
  nn::GradCheckReport report;
};

std::vector<NamedGradCheck> check_layer_gradients(std::uint64_t seed,
                                                  const nn::GradCheckOptions& options = {});
nn::GradCheckReport check_siamese_gradients(std::uint64_t seed,
                                            const nn::GradCheckOptions& options = {});
nn::GradCheckReport check_seq2seq_gradients(std::uint64_t seed,
                                            const nn::GradCheckOptions& options = {});

/// All of the above: layers first, then "siamese" and "seq2seq".
std::vector<NamedGradCheck> check_all_gradients(std::uint64_t seed,
                                                const nn::GradCheckOptions& options = {});

}  // namespace authnorm
