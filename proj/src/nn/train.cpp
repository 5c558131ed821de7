#include "ipcnn/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "ipcnn/binary_io.hpp"
#include "ipcnn/error.hpp"

namespace ipcnn::nn {

namespace {

constexpr int kStageEpochs = 10;
constexpr int kInitialBatch = 128;
constexpr int kMinimumBatch = 32;
constexpr std::size_t kEvalChunk = 256;
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ull;

// Activation tensors are several MB each; keeping them on the heap instead of fresh
// mmap regions avoids page-faulting every buffer on every step.
void keep_large_allocations() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    return true;
  }();
  (void)once;
#endif
}

}  // namespace

std::vector<BatchStage> halving_schedule(int epochs) {
  std::vector<BatchStage> stages;
  for (int first = 1, k = 0; first <= epochs; first += kStageEpochs, ++k) {
    const int batch = std::max(kMinimumBatch, kInitialBatch >> std::min(k, 16));
    const int last = std::min(epochs, first + kStageEpochs - 1);
    if (!stages.empty() && stages.back().batch_size == batch) {
      stages.back().last_epoch = last;
    } else {
      stages.push_back({first, last, batch});
    }
  }
  return stages;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidConfig, why); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("adam betas must lie in [0,1)");
  if (!(adam_epsilon > 0.0)) fail("adam epsilon must be positive");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) fail("holdout fraction must lie in [0,1)");
  for (int e = 1; e <= epochs; ++e) {
    int covering = 0;
    for (const auto& s : batch_schedule) {
      if (s.batch_size < 1) fail("batch sizes must be positive");
      if (e >= s.first_epoch && e <= s.last_epoch) ++covering;
    }
    if (covering != 1) fail("batch schedule must cover epoch " + std::to_string(e) + " exactly once");
  }
}

int TrainConfig::batch_size_for(int epoch) const {
  for (const auto& s : batch_schedule) {
    if (epoch >= s.first_epoch && epoch <= s.last_epoch) return s.batch_size;
  }
  throw Error(ErrorCode::kInvalidConfig, "no batch size scheduled for epoch " + std::to_string(epoch));
}

void pack_batch(const data::Dataset& dataset, std::span<const std::size_t> indices, Tensor& inputs, Tensor& targets) {
  const Shape shape{indices.size(), 1, data::kContextSize, data::kContextSize};
  if (inputs.shape() != shape) inputs = Tensor(shape);
  if (targets.shape() != shape) targets = Tensor(shape);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& rec = dataset.records[indices[b]];
    std::copy(rec.input.begin(), rec.input.end(), inputs.plane(b, 0));
    std::copy(rec.target.begin(), rec.target.end(), targets.plane(b, 0));
  }
}

double evaluate_loss(const IpcnnModel& model, const data::Dataset& dataset, std::span<const std::size_t> indices) {
  if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  Tensor inputs, targets;
  for (std::size_t start = 0; start < indices.size(); start += kEvalChunk) {
    const auto chunk = indices.subspan(start, std::min(kEvalChunk, indices.size() - start));
    pack_batch(dataset, chunk, inputs, targets);
    const Tensor r = ipcnn_forward(model, inputs, Mode::kInfer);
    sum += mse_loss(r, targets).loss * static_cast<double>(chunk.size());
  }
  return sum / static_cast<double>(indices.size());
}

TrainResult train(const data::Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch) {
  keep_large_allocations();
  if (dataset.records.empty()) throw Error(ErrorCode::kDatasetEmpty, "dataset holds no samples");
  config.validate();

  TrainResult result;
  result.model = IpcnnModel::create(config.arch, dataset.qp, config.seed);
  if (config.output_init == OutputInit::kZero) {
    auto& out = result.model.layers.back().conv.weights;
    std::fill(out.begin(), out.end(), 0.0);
  }
  if (config.arch.image_channels != 1 || config.arch.height != data::kContextSize ||
      config.arch.width != data::kContextSize) {
    throw Error(ErrorCode::kInvalidConfig, "training data is 1x16x16; architecture must match");
  }

  std::mt19937_64 rng(config.seed ^ kShuffleStream);
  std::vector<std::size_t> order(dataset.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t holdout = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(order.size())));
  if (holdout >= order.size()) holdout = 0;
  std::vector<std::size_t> holdout_idx(order.end() - static_cast<std::ptrdiff_t>(holdout), order.end());
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(holdout));
  result.train_samples = train_idx.size();
  result.holdout_samples = holdout_idx.size();

  const AdamHyper hyper = config.adam();
  AdamState adam;
  Tensor inputs, targets;
  std::vector<std::size_t> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const int batch_size = config.batch_size_for(epoch);
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(batch_size)) {
      const std::size_t end = std::min(train_idx.size(), start + static_cast<std::size_t>(batch_size));
      batch.assign(train_idx.begin() + static_cast<std::ptrdiff_t>(start), train_idx.begin() + static_cast<std::ptrdiff_t>(end));
      const std::size_t real = batch.size();
      if (batch.size() == 1) batch.push_back(batch.front());
      pack_batch(dataset, batch, inputs, targets);
      GradientResult step = compute_gradients(result.model, inputs, targets);
      adam_step(parameter_views(result.model), gradient_views(step.grads), adam, hyper);
      update_running_stats(result.model, step.cache);
      loss_sum += step.loss * static_cast<double>(real);
    }
    EpochLog entry{epoch, batch_size, loss_sum / static_cast<double>(train_idx.size()),
                   evaluate_loss(result.model, dataset, holdout_idx)};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return result;
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,batch_size,train_loss,holdout_loss\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "," + std::to_string(e.batch_size) + "," + format_real(e.train_loss) + "," +
           format_real(e.holdout_loss) + "\n";
  }
  return out;
}

}  // namespace ipcnn::nn
