#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ipcnn/nn/layers.hpp"

namespace ipcnn::nn {

// Layer stack shape. depth counts weight (conv) layers: layer 1 is
// Conv+ReLU, layers 2..depth-1 are Conv+BN+ReLU, layer `depth` is Conv.
struct Architecture {
  int depth = 10;
  int channels = 64;
  int image_channels = 1;
  int height = 16;
  int width = 16;

  static Architecture ipcnn() { return {}; }
  bool operator==(const Architecture&) const = default;
};

struct WeightLayer {
  ConvLayer conv;
  std::optional<BatchNormLayer> bn;
  bool relu = true;
};

// One QP-specific residual network: maps a context Y to R(Y) ~ V.
struct IpcnnModel {
  int qp = 0;
  Architecture arch;
  std::vector<WeightLayer> layers;

  // Fan-in scaled normal weights (variance 2 / fan_in), zero biases,
  // gamma = 1, beta = 0, running mean 0 and variance 1.
  static IpcnnModel create(const Architecture& arch, int qp, std::uint64_t seed);

  // Throws if the layer stack does not follow the architecture pattern.
  void validate() const;

  std::size_t parameter_count() const;
  std::size_t batchnorm_count() const;
};

struct ForwardCache {
  // Input of each conv layer; entry i+1 is also the ReLU output of layer i.
  std::vector<Tensor> conv_inputs;
  std::vector<std::optional<BatchNormCache>> bn;
};

// R(Y) for a (batch, image_channels, height, width) input.
Tensor ipcnn_forward(const IpcnnModel& model, const Tensor& y, Mode mode, ForwardCache* cache = nullptr);

struct ModelGradients {
  std::vector<ConvGrads> conv;
  std::vector<BatchNormGrads> bn;  // empty entries for layers without BN
};

// Backpropagates dL/dR(Y) through a train-mode forward pass recorded in `cache`.
ModelGradients backward(const IpcnnModel& model, const ForwardCache& cache, const Tensor& grad_output);

struct GradientResult {
  double loss = 0.0;
  ModelGradients grads;
  ForwardCache cache;
};

// Train-mode forward, MSE loss against `targets`, and backward.
GradientResult compute_gradients(const IpcnnModel& model, const Tensor& inputs, const Tensor& targets);

// Folds the batch statistics recorded in a train-mode cache into each BN layer.
void update_running_stats(IpcnnModel& model, const ForwardCache& cache);

// Parameter and gradient views in one fixed order: per layer conv weights,
// conv bias, then BN gamma and beta when present.
std::vector<std::span<double>> parameter_views(IpcnnModel& model);
std::vector<std::span<const double>> parameter_views(const IpcnnModel& model);
std::vector<std::span<const double>> gradient_views(const ModelGradients& grads);

}  // namespace ipcnn::nn
