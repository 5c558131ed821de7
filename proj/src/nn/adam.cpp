#include "ipcnn/nn/adam.hpp"

#include <cmath>

#include "ipcnn/error.hpp"

namespace ipcnn::nn {

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const AdamHyper& hyper) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam: " + std::to_string(params.size()) + " parameter groups but " +
                                               std::to_string(grads.size()) + " gradient groups");
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam state layout changed between steps");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t g = 0; g < params.size(); ++g) {
    auto p = params[g];
    auto d = grads[g];
    auto& m = state.first_moment[g];
    auto& v = state.second_moment[g];
    if (p.size() != d.size() || p.size() != m.size()) {
      throw Error(ErrorCode::kShapeMismatch, "adam: group " + std::to_string(g) + " size mismatch");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * d[i];
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * d[i] * d[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  }
}

}  // namespace ipcnn::nn
