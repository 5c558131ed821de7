#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ipcnn::nn {

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step = 0;
};

// One bias-corrected adaptive-moment update. `state` is sized lazily on the
// first call; params and grads must keep the same layout across calls.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const AdamHyper& hyper);

}  // namespace ipcnn::nn
