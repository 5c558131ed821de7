#pragma once

#include <vector>

#include "ipcnn/nn/tensor.hpp"

namespace ipcnn::nn {

enum class Mode { kTrain, kInfer };

inline constexpr int kKernel = 3;
inline constexpr int kKernelArea = kKernel * kKernel;

// 3x3 convolution, weights laid out (out, in, ky, kx).
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  ConvLayer() = default;
  ConvLayer(int in, int out);

  double& weight(int o, int i, int ky, int kx) { return weights[((o * in_channels + i) * kKernel + ky) * kKernel + kx]; }
  double weight(int o, int i, int ky, int kx) const {
    return weights[((o * in_channels + i) * kKernel + ky) * kKernel + kx];
  }
};

struct ConvGrads {
  std::vector<double> weights;
  std::vector<double> bias;
};

// Zero-padded "same" cross-correlation (no kernel flip); output H x W equals input.
Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer);

// Accumulates parameter gradients into `grads` (sized on first use) and returns
// dL/dinput, or an empty tensor when `need_input_grad` is false.
Tensor conv2d_backward(const Tensor& input, const ConvLayer& layer, const Tensor& grad_output, ConvGrads& grads,
                       bool need_input_grad = true);

// Per-channel (spatial) batch normalization.
struct BatchNormLayer {
  static constexpr double kDefaultEpsilon = 1e-5;
  static constexpr double kDefaultMomentum = 0.9;

  int channels = 0;
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double epsilon = kDefaultEpsilon;
  // running = momentum * running + (1 - momentum) * batch
  double momentum = kDefaultMomentum;

  BatchNormLayer() = default;
  explicit BatchNormLayer(int channels);
};

struct BatchNormCache {
  Tensor normalized;  // x_hat
  std::vector<double> inv_std;
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // biased, as used for normalization
  std::size_t count = 0;          // elements per channel
};

struct BatchNormGrads {
  std::vector<double> gamma;
  std::vector<double> beta;
};

// Train mode normalizes with batch statistics over (batch, height, width) and
// fills `cache`; infer mode uses the running statistics.
Tensor batchnorm_forward(const Tensor& x, const BatchNormLayer& layer, Mode mode, BatchNormCache* cache = nullptr);

// Train-mode forward that also folds the batch statistics into the running estimates.
Tensor batchnorm_forward(const Tensor& x, BatchNormLayer& layer, Mode mode);

// Exponential moving average; running variance uses the unbiased batch estimate.
void update_running_stats(BatchNormLayer& layer, const BatchNormCache& cache);

Tensor batchnorm_backward(const Tensor& grad_output, const BatchNormLayer& layer, const BatchNormCache& cache,
                          BatchNormGrads& grads);

Tensor relu(const Tensor& x);
void relu_inplace(Tensor& x);
// Masks grad by (activation > 0), where activation is the ReLU output.
void relu_backward_inplace(Tensor& grad, const Tensor& activation);

struct LossAndGrad {
  double loss = 0.0;
  Tensor grad;
};

// mean((prediction - target)^2) and its gradient 2 (prediction - target) / n.
LossAndGrad mse_loss(const Tensor& prediction, const Tensor& target);

}  // namespace ipcnn::nn
