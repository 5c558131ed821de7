#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ipcnn/dataset.hpp"
#include "ipcnn/nn/adam.hpp"
#include "ipcnn/nn/model.hpp"

namespace ipcnn::nn {

// Inclusive, 1-based epoch range trained with one batch size.
struct BatchStage {
  int first_epoch = 1;
  int last_epoch = 1;
  int batch_size = 128;
  bool operator==(const BatchStage&) const = default;
};

// Batch size halves every 10 epochs from 128 down to a floor of 32.
std::vector<BatchStage> halving_schedule(int epochs);

// How the final conv layer starts out. kFanIn uses the same variance-2/fan_in
// normal draw as every other layer. kZero starts R(Y) at exactly 0, so the
// first steps begin from the plain codec prediction instead of from noise.
enum class OutputInit { kFanIn, kZero };

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 30;
  std::vector<BatchStage> batch_schedule = halving_schedule(30);
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
  // Samples withheld from the gradient (chosen by the seeded permutation) and
  // scored every epoch in infer mode.
  double holdout_fraction = 0.05;
  Architecture arch = Architecture::ipcnn();
  OutputInit output_init = OutputInit::kFanIn;

  void validate() const;
  int batch_size_for(int epoch) const;
  AdamHyper adam() const { return {learning_rate, beta1, beta2, adam_epsilon}; }
};

struct EpochLog {
  int epoch = 0;
  int batch_size = 0;
  double train_loss = 0.0;    // sample-weighted mean of train-mode batch losses
  double holdout_loss = 0.0;  // NaN when the holdout is empty
};

struct TrainResult {
  IpcnnModel model;
  std::vector<EpochLog> log;
  std::size_t train_samples = 0;
  std::size_t holdout_samples = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Deterministic for a fixed (dataset, config): model init, holdout split and
// per-epoch shuffles all derive from config.seed. A batch holding a single
// sample is duplicated to two, which leaves both the BN statistics and the
// mean-loss gradient unchanged.
TrainResult train(const data::Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch = {});

// Infer-mode mean squared error of R(Y) against V over the given records.
double evaluate_loss(const IpcnnModel& model, const data::Dataset& dataset, std::span<const std::size_t> indices);

// epoch,batch_size,train_loss,holdout_loss
std::string training_log_csv(const std::vector<EpochLog>& log);

// Packs records into (count, 1, 16, 16) input and target tensors.
void pack_batch(const data::Dataset& dataset, std::span<const std::size_t> indices, Tensor& inputs, Tensor& targets);

}  // namespace ipcnn::nn
