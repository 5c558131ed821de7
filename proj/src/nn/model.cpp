#include "ipcnn/nn/model.hpp"

#include <cmath>
#include <random>

#include "ipcnn/error.hpp"

namespace ipcnn::nn {

IpcnnModel IpcnnModel::create(const Architecture& arch, int qp, std::uint64_t seed) {
  if (arch.depth < 2 || arch.channels < 1 || arch.image_channels < 1 || arch.height < 1 || arch.width < 1) {
    throw Error(ErrorCode::kInvalidConfig, "architecture needs depth >= 2 and positive sizes");
  }
  IpcnnModel model;
  model.qp = qp;
  model.arch = arch;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < arch.depth; ++i) {
    const bool first = i == 0;
    const bool last = i == arch.depth - 1;
    WeightLayer layer;
    layer.conv = ConvLayer(first ? arch.image_channels : arch.channels, last ? arch.image_channels : arch.channels);
    const double stddev = std::sqrt(2.0 / (layer.conv.in_channels * kKernelArea));
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& w : layer.conv.weights) w = dist(rng);
    if (!first && !last) layer.bn = BatchNormLayer(arch.channels);
    layer.relu = !last;
    model.layers.push_back(std::move(layer));
  }
  return model;
}

void IpcnnModel::validate() const {
  if (static_cast<int>(layers.size()) != arch.depth || arch.depth < 2) {
    throw Error(ErrorCode::kShapeMismatch, "model has " + std::to_string(layers.size()) + " weight layers, architecture says " +
                                               std::to_string(arch.depth));
  }
  for (int i = 0; i < arch.depth; ++i) {
    const auto& l = layers[i];
    const bool first = i == 0;
    const bool last = i == arch.depth - 1;
    const int in = first ? arch.image_channels : arch.channels;
    const int out = last ? arch.image_channels : arch.channels;
    const bool ok = l.conv.in_channels == in && l.conv.out_channels == out &&
                    l.conv.weights.size() == static_cast<std::size_t>(in * out * kKernelArea) &&
                    l.conv.bias.size() == static_cast<std::size_t>(out) && l.relu == !last &&
                    l.bn.has_value() == (!first && !last) &&
                    (!l.bn || (l.bn->channels == out && l.bn->gamma.size() == static_cast<std::size_t>(out) &&
                               l.bn->beta.size() == static_cast<std::size_t>(out) &&
                               l.bn->running_mean.size() == static_cast<std::size_t>(out) &&
                               l.bn->running_var.size() == static_cast<std::size_t>(out)));
    if (!ok) throw Error(ErrorCode::kShapeMismatch, "layer " + std::to_string(i + 1) + " does not match the architecture");
  }
}

std::size_t IpcnnModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers) {
    total += l.conv.weights.size() + l.conv.bias.size();
    if (l.bn) total += l.bn->gamma.size() + l.bn->beta.size();
  }
  return total;
}

std::size_t IpcnnModel::batchnorm_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.bn.has_value() ? 1 : 0;
  return n;
}

Tensor ipcnn_forward(const IpcnnModel& model, const Tensor& y, Mode mode, ForwardCache* cache) {
  const Shape& s = y.shape();
  if (s.n == 0 || s.c != static_cast<std::size_t>(model.arch.image_channels) ||
      s.h != static_cast<std::size_t>(model.arch.height) || s.w != static_cast<std::size_t>(model.arch.width)) {
    throw Error(ErrorCode::kShapeMismatch, "model expects (batch," + std::to_string(model.arch.image_channels) + "," +
                                               std::to_string(model.arch.height) + "," +
                                               std::to_string(model.arch.width) + "), got " + s.to_string());
  }
  if (cache != nullptr) {
    cache->conv_inputs.clear();
    cache->bn.assign(model.layers.size(), std::nullopt);
  }
  Tensor x = y;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& layer = model.layers[i];
    Tensor z = conv2d_forward(x, layer.conv);
    if (cache != nullptr) {
      cache->conv_inputs.push_back(std::move(x));
    }
    if (layer.bn) {
      BatchNormCache* bn_cache = nullptr;
      if (cache != nullptr && mode == Mode::kTrain) bn_cache = &cache->bn[i].emplace();
      z = batchnorm_forward(z, *layer.bn, mode, bn_cache);
    }
    if (layer.relu) relu_inplace(z);
    x = std::move(z);
  }
  return x;
}

ModelGradients backward(const IpcnnModel& model, const ForwardCache& cache, const Tensor& grad_output) {
  const std::size_t depth = model.layers.size();
  if (cache.conv_inputs.size() != depth) {
    throw Error(ErrorCode::kInvalidArgument, "forward cache does not match the model");
  }
  ModelGradients grads;
  grads.conv.resize(depth);
  grads.bn.resize(depth);
  Tensor g = grad_output;
  for (std::size_t k = depth; k-- > 0;) {
    const auto& layer = model.layers[k];
    if (layer.relu) relu_backward_inplace(g, cache.conv_inputs[k + 1]);
    if (layer.bn) {
      if (!cache.bn[k]) throw Error(ErrorCode::kInvalidArgument, "backward needs a train-mode forward cache");
      g = batchnorm_backward(g, *layer.bn, *cache.bn[k], grads.bn[k]);
    }
    g = conv2d_backward(cache.conv_inputs[k], layer.conv, g, grads.conv[k], k > 0);
  }
  return grads;
}

GradientResult compute_gradients(const IpcnnModel& model, const Tensor& inputs, const Tensor& targets) {
  GradientResult result;
  const Tensor prediction = ipcnn_forward(model, inputs, Mode::kTrain, &result.cache);
  auto loss = mse_loss(prediction, targets);
  result.loss = loss.loss;
  result.grads = backward(model, result.cache, loss.grad);
  return result;
}

void update_running_stats(IpcnnModel& model, const ForwardCache& cache) {
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    auto& layer = model.layers[i];
    if (layer.bn && i < cache.bn.size() && cache.bn[i]) update_running_stats(*layer.bn, *cache.bn[i]);
  }
}

std::vector<std::span<double>> parameter_views(IpcnnModel& model) {
  std::vector<std::span<double>> views;
  for (auto& l : model.layers) {
    views.emplace_back(l.conv.weights);
    views.emplace_back(l.conv.bias);
    if (l.bn) {
      views.emplace_back(l.bn->gamma);
      views.emplace_back(l.bn->beta);
    }
  }
  return views;
}

std::vector<std::span<const double>> parameter_views(const IpcnnModel& model) {
  std::vector<std::span<const double>> views;
  for (const auto& l : model.layers) {
    views.emplace_back(l.conv.weights);
    views.emplace_back(l.conv.bias);
    if (l.bn) {
      views.emplace_back(l.bn->gamma);
      views.emplace_back(l.bn->beta);
    }
  }
  return views;
}

std::vector<std::span<const double>> gradient_views(const ModelGradients& grads) {
  std::vector<std::span<const double>> views;
  for (std::size_t i = 0; i < grads.conv.size(); ++i) {
    views.emplace_back(grads.conv[i].weights);
    views.emplace_back(grads.conv[i].bias);
    if (!grads.bn[i].gamma.empty()) {
      views.emplace_back(grads.bn[i].gamma);
      views.emplace_back(grads.bn[i].beta);
    }
  }
  return views;
}

}  // namespace ipcnn::nn
