#include "ipcnn/nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "ipcnn/error.hpp"

namespace ipcnn::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Eigen::Map<const Eigen::ArrayXd> plane_array(const double* p, std::size_t hw) {
  return Eigen::Map<const Eigen::ArrayXd>(p, static_cast<Eigen::Index>(hw));
}

// Reductions go through fixed-order loops. Eigen's vectorized sums peel to
// the buffer's alignment, so the same data at another address could round
// differently and break run-to-run reproducibility.
double sum_of(const double* p, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int k = 0; k < 4; ++k) acc[k] += p[i + k];
  }
  for (; i < n; ++i) acc[0] += p[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double centered_square_sum(const double* p, std::size_t n, double mean) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int k = 0; k < 4; ++k) acc[k] += (p[i + k] - mean) * (p[i + k] - mean);
  }
  for (; i < n; ++i) acc[0] += (p[i] - mean) * (p[i] - mean);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot_of(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int k = 0; k < 4; ++k) acc[k] += a[i + k] * b[i + k];
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

// Copies one sample into a zero-bordered (h+2) x (w+2) buffer per channel.
void pad_sample(const Tensor& input, std::size_t n, std::vector<double>& padded) {
  const auto& s = input.shape();
  const std::size_t pw = s.w + 2;
  const std::size_t pplane = (s.h + 2) * pw;
  padded.assign(s.c * pplane, 0.0);
  for (std::size_t c = 0; c < s.c; ++c) {
    const double* src = input.plane(n, c);
    double* dst = padded.data() + c * pplane + pw + 1;
    for (std::size_t y = 0; y < s.h; ++y) std::copy_n(src + y * s.w, s.w, dst + y * pw);
  }
}

// Unfolds one sample into a (in_channels * 9) x (h * w) patch matrix.
void im2col(const Tensor& input, std::size_t n, std::vector<double>& padded, std::vector<double>& col) {
  const auto& s = input.shape();
  const std::size_t pw = s.w + 2;
  const std::size_t pplane = (s.h + 2) * pw;
  const std::size_t hw = s.plane();
  pad_sample(input, n, padded);
  col.resize(s.c * kKernelArea * hw);
  for (std::size_t c = 0; c < s.c; ++c) {
    const double* src = padded.data() + c * pplane;
    for (std::size_t ky = 0; ky < kKernel; ++ky) {
      for (std::size_t kx = 0; kx < kKernel; ++kx) {
        double* dst = col.data() + (c * kKernelArea + ky * kKernel + kx) * hw;
        for (std::size_t y = 0; y < s.h; ++y) std::copy_n(src + (y + ky) * pw + kx, s.w, dst + y * s.w);
      }
    }
  }
}

// Scatter-adds a patch-matrix gradient back onto one sample of `grad_input`.
void col2im(const std::vector<double>& col, std::vector<double>& padded, Tensor& grad_input, std::size_t n) {
  const auto& s = grad_input.shape();
  const std::size_t pw = s.w + 2;
  const std::size_t pplane = (s.h + 2) * pw;
  const std::size_t hw = s.plane();
  padded.assign(s.c * pplane, 0.0);
  for (std::size_t c = 0; c < s.c; ++c) {
    double* acc = padded.data() + c * pplane;
    for (std::size_t ky = 0; ky < kKernel; ++ky) {
      for (std::size_t kx = 0; kx < kKernel; ++kx) {
        const double* src = col.data() + (c * kKernelArea + ky * kKernel + kx) * hw;
        for (std::size_t y = 0; y < s.h; ++y) {
          double* row = acc + (y + ky) * pw + kx;
          const double* in = src + y * s.w;
          for (std::size_t x = 0; x < s.w; ++x) row[x] += in[x];
        }
      }
    }
    double* dst = grad_input.plane(n, c);
    for (std::size_t y = 0; y < s.h; ++y) std::copy_n(acc + (y + 1) * pw + 1, s.w, dst + y * s.w);
  }
}

void check_conv_input(const Tensor& input, const ConvLayer& layer) {
  if (input.shape().c != static_cast<std::size_t>(layer.in_channels)) {
    throw Error(ErrorCode::kChannelMismatch, "conv expects " + std::to_string(layer.in_channels) +
                                                 " input channels, got tensor " + input.shape().to_string());
  }
}

}  // namespace

ConvLayer::ConvLayer(int in, int out)
    : in_channels(in),
      out_channels(out),
      weights(static_cast<std::size_t>(in) * out * kKernelArea, 0.0),
      bias(static_cast<std::size_t>(out), 0.0) {}

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer) {
  check_conv_input(input, layer);
  const auto& s = input.shape();
  Tensor out(Shape{s.n, static_cast<std::size_t>(layer.out_channels), s.h, s.w});
  const auto hw = static_cast<Eigen::Index>(s.plane());
  const auto k = static_cast<Eigen::Index>(layer.in_channels * kKernelArea);
  ConstMatrixMap w(layer.weights.data(), layer.out_channels, k);
  std::vector<double> padded, col;
  for (std::size_t n = 0; n < s.n; ++n) {
    im2col(input, n, padded, col);
    ConstMatrixMap patches(col.data(), k, hw);
    MatrixMap y(out.plane(n, 0), layer.out_channels, hw);
    y.noalias() = w * patches;
    for (int o = 0; o < layer.out_channels; ++o) y.row(o).array() += layer.bias[o];
  }
  return out;
}

Tensor conv2d_backward(const Tensor& input, const ConvLayer& layer, const Tensor& grad_output, ConvGrads& grads,
                       bool need_input_grad) {
  check_conv_input(input, layer);
  const auto& s = input.shape();
  const Shape expected{s.n, static_cast<std::size_t>(layer.out_channels), s.h, s.w};
  if (grad_output.shape() != expected) {
    throw Error(ErrorCode::kShapeMismatch, "conv output gradient " + grad_output.shape().to_string() + " != " +
                                               expected.to_string());
  }
  if (grads.weights.size() != layer.weights.size()) grads.weights.assign(layer.weights.size(), 0.0);
  if (grads.bias.size() != layer.bias.size()) grads.bias.assign(layer.bias.size(), 0.0);

  const auto hw = static_cast<Eigen::Index>(s.plane());
  const auto k = static_cast<Eigen::Index>(layer.in_channels * kKernelArea);
  ConstMatrixMap w(layer.weights.data(), layer.out_channels, k);
  MatrixMap dw(grads.weights.data(), layer.out_channels, k);
  Eigen::Map<Eigen::VectorXd> db(grads.bias.data(), layer.out_channels);

  Tensor grad_input;
  if (need_input_grad) grad_input = Tensor(s);
  std::vector<double> padded, col;
  std::vector<double> dcol(static_cast<std::size_t>(k * hw));
  for (std::size_t n = 0; n < s.n; ++n) {
    im2col(input, n, padded, col);
    ConstMatrixMap patches(col.data(), k, hw);
    ConstMatrixMap dy(grad_output.plane(n, 0), layer.out_channels, hw);
    dw.noalias() += dy * patches.transpose();
    for (int o = 0; o < layer.out_channels; ++o) db[o] += sum_of(grad_output.plane(n, static_cast<std::size_t>(o)), s.plane());
    if (need_input_grad) {
      MatrixMap dpatches(dcol.data(), k, hw);
      dpatches.noalias() = w.transpose() * dy;
      col2im(dcol, padded, grad_input, n);
    }
  }
  return grad_input;
}

BatchNormLayer::BatchNormLayer(int ch)
    : channels(ch),
      gamma(static_cast<std::size_t>(ch), 1.0),
      beta(static_cast<std::size_t>(ch), 0.0),
      running_mean(static_cast<std::size_t>(ch), 0.0),
      running_var(static_cast<std::size_t>(ch), 1.0) {}

Tensor batchnorm_forward(const Tensor& x, const BatchNormLayer& layer, Mode mode, BatchNormCache* cache) {
  const auto& s = x.shape();
  if (s.c != static_cast<std::size_t>(layer.channels)) {
    throw Error(ErrorCode::kChannelMismatch, "batch norm expects " + std::to_string(layer.channels) +
                                                 " channels, got tensor " + s.to_string());
  }
  if (mode == Mode::kTrain && s.n < 2) {
    throw Error(ErrorCode::kBatchTooSmall, "train-mode batch norm needs batch >= 2, got " + std::to_string(s.n));
  }
  const std::size_t hw = s.plane();
  const std::size_t count = s.n * hw;
  Tensor out(s);

  std::vector<double> mean(s.c), var(s.c), inv_std(s.c);
  for (std::size_t c = 0; c < s.c; ++c) {
    if (mode == Mode::kTrain) {
      double sum = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) sum += sum_of(x.plane(n, c), hw);
      mean[c] = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < s.n; ++n) sq += centered_square_sum(x.plane(n, c), hw, mean[c]);
      var[c] = sq / static_cast<double>(count);
    } else {
      mean[c] = layer.running_mean[c];
      var[c] = layer.running_var[c];
    }
    inv_std[c] = 1.0 / std::sqrt(var[c] + layer.epsilon);
  }

  if (cache != nullptr) {
    cache->normalized = Tensor(s);
    cache->count = count;
  }
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const auto p = plane_array(x.plane(n, c), hw);
      Eigen::Map<Eigen::ArrayXd> q(out.plane(n, c), static_cast<Eigen::Index>(hw));
      if (cache != nullptr) {
        Eigen::Map<Eigen::ArrayXd> xhat(cache->normalized.plane(n, c), static_cast<Eigen::Index>(hw));
        xhat = (p - mean[c]) * inv_std[c];
        q = layer.gamma[c] * xhat + layer.beta[c];
      } else {
        q = layer.gamma[c] * ((p - mean[c]) * inv_std[c]) + layer.beta[c];
      }
    }
  }
  if (cache != nullptr) {
    cache->inv_std = std::move(inv_std);
    cache->batch_mean = std::move(mean);
    cache->batch_var = std::move(var);
  }
  return out;
}

Tensor batchnorm_forward(const Tensor& x, BatchNormLayer& layer, Mode mode) {
  if (mode == Mode::kInfer) return batchnorm_forward(x, static_cast<const BatchNormLayer&>(layer), mode, nullptr);
  BatchNormCache cache;
  Tensor out = batchnorm_forward(x, static_cast<const BatchNormLayer&>(layer), mode, &cache);
  update_running_stats(layer, cache);
  return out;
}

void update_running_stats(BatchNormLayer& layer, const BatchNormCache& cache) {
  const double unbias =
      cache.count > 1 ? static_cast<double>(cache.count) / static_cast<double>(cache.count - 1) : 1.0;
  for (int c = 0; c < layer.channels; ++c) {
    layer.running_mean[c] = layer.momentum * layer.running_mean[c] + (1.0 - layer.momentum) * cache.batch_mean[c];
    layer.running_var[c] = layer.momentum * layer.running_var[c] + (1.0 - layer.momentum) * cache.batch_var[c] * unbias;
  }
}

Tensor batchnorm_backward(const Tensor& grad_output, const BatchNormLayer& layer, const BatchNormCache& cache,
                          BatchNormGrads& grads) {
  const auto& s = grad_output.shape();
  if (s != cache.normalized.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "batch norm gradient " + s.to_string() + " != cached " +
                                               cache.normalized.shape().to_string());
  }
  if (grads.gamma.size() != s.c) grads.gamma.assign(s.c, 0.0);
  if (grads.beta.size() != s.c) grads.beta.assign(s.c, 0.0);
  const std::size_t hw = s.plane();
  const double m = static_cast<double>(cache.count);
  Tensor grad_input(s);
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      sum_dy += sum_of(grad_output.plane(n, c), hw);
      sum_dy_xhat += dot_of(grad_output.plane(n, c), cache.normalized.plane(n, c), hw);
    }
    grads.gamma[c] += sum_dy_xhat;
    grads.beta[c] += sum_dy;
    // dx = gamma * inv_std / m * (m * dy - sum(dy) - x_hat * sum(dy * x_hat))
    const double scale = layer.gamma[c] * cache.inv_std[c] / m;
    for (std::size_t n = 0; n < s.n; ++n) {
      const double* dy = grad_output.plane(n, c);
      const double* xhat = cache.normalized.plane(n, c);
      double* dx = grad_input.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) dx[i] = scale * (m * dy[i] - sum_dy - xhat[i] * sum_dy_xhat);
    }
  }
  return grad_input;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  relu_inplace(out);
  return out;
}

void relu_inplace(Tensor& x) {
  for (double& v : x.data()) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(Tensor& grad, const Tensor& activation) {
  if (grad.shape() != activation.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "relu gradient " + grad.shape().to_string() + " != activation " +
                                               activation.shape().to_string());
  }
  auto g = grad.data();
  const auto a = activation.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(a[i] > 0.0)) g[i] = 0.0;
  }
}

LossAndGrad mse_loss(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "loss prediction " + prediction.shape().to_string() + " vs target " +
                                               target.shape().to_string());
  }
  LossAndGrad out{0.0, Tensor(prediction.shape())};
  const auto p = prediction.data();
  const auto t = target.data();
  auto g = out.grad.data();
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] - t[i];
  out.loss = dot_of(g.data(), g.data(), g.size()) / n;
  for (double& v : g) v *= 2.0 / n;
  return out;
}

}  // namespace ipcnn::nn
