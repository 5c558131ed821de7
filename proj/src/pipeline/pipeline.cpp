#include "ipcnn/pipeline.hpp"

#include <algorithm>

#include "ipcnn/error.hpp"

namespace ipcnn::pipeline {

void ModelRegistry::add(nn::IpcnnModel model) {
  model.validate();
  if (model.arch.image_channels != 1 || model.arch.height != data::kContextSize ||
      model.arch.width != data::kContextSize) {
    throw Error(ErrorCode::kShapeMismatch, "registry models must map 1x16x16 contexts");
  }
  const int qp = model.qp;
  models_.insert_or_assign(qp, std::move(model));
}

const nn::IpcnnModel& ModelRegistry::at(Qp qp) const {
  const auto it = models_.find(qp.value());
  if (it == models_.end()) {
    std::string known;
    for (const auto& [q, _] : models_) known += (known.empty() ? "" : ",") + std::to_string(q);
    throw Error(ErrorCode::kUnregisteredQp, "no model registered for qp " + std::to_string(qp.value()) +
                                                " (registered: " + (known.empty() ? "none" : known) + ")");
  }
  return it->second;
}

std::vector<int> ModelRegistry::qps() const {
  std::vector<int> out;
  for (const auto& [q, _] : models_) out.push_back(q);
  return out;
}

Grid16 ipcnn_predict(const nn::IpcnnModel& model, const data::ContextBlock16& context) {
  nn::Tensor y(nn::Shape{1, 1, data::kContextSize, data::kContextSize},
               std::vector<double>(context.values.begin(), context.values.end()));
  const nn::Tensor residual = nn::ipcnn_forward(model, y, nn::Mode::kInfer);
  Grid16 target{};
  const auto r = residual.data();
  for (int i = 0; i < data::kContextArea; ++i) target[i] = std::clamp(context.values[i] - r[i], 0.0, 1.0);
  return target;
}

codec::Block8 target_pu_prediction(const Grid16& target) {
  codec::Block8 pred{};
  for (int y = 0; y < codec::kN; ++y) {
    for (int x = 0; x < codec::kN; ++x) {
      pred[y * codec::kN + x] = data::denormalize_sample(target[(y + 8) * data::kContextSize + (x + 8)]);
    }
  }
  return pred;
}

EncodeResult encode_with_ipcnn(const Plane& original, Qp qp, const ModelRegistry& registry) {
  const nn::IpcnnModel& model = registry.at(qp);
  codec::CodingPlane coding(original.width(), original.height());
  std::vector<PredictionOutcome> outcomes;
  for (const auto origin : io::tile_origins(original)) {
    const codec::Block8 block = codec::extract_block(original, origin);
    const auto refs = codec::gather_reference_samples(coding, origin);
    const auto decision = codec::select_best_mode(block, refs);

    PredictionOutcome outcome;
    outcome.pu_origin = origin;
    outcome.hevc_mode = decision.mode;
    outcome.hevc_sse = decision.sse;
    codec::Block8 prediction = decision.prediction;
    if (data::has_full_context(origin)) {
      const auto context = data::assemble_context(coding.recon(), decision.prediction, origin);
      const Grid16 target = ipcnn_predict(model, context);
      prediction = target_pu_prediction(target);
      outcome.context = context.values;
      outcome.refined_context = target;
    } else {
      outcome.used_fallback = true;
    }
    outcome.ipcnn_sse = codec::sse(block, prediction);
    coding.store_block(origin, codec::code_residual(block, prediction, qp));
    outcomes.push_back(std::move(outcome));
  }
  return {std::move(coding).release(), std::move(outcomes)};
}

double reconstruction_quadrant_mse(const Grid16& block, const Grid16& original) {
  double sum = 0.0;
  int count = 0;
  for (int y = 0; y < data::kContextSize; ++y) {
    for (int x = 0; x < data::kContextSize; ++x) {
      if (data::is_pu_quadrant(x, y)) continue;
      const double d = (block[y * data::kContextSize + x] - original[y * data::kContextSize + x]) * 255.0;
      sum += d * d;
      ++count;
    }
  }
  return sum / count;
}

RefinementMse refine_reconstructions(const nn::IpcnnModel& model, const data::ContextBlock16& context,
                                     const Grid16& original_window) {
  const Grid16 target = ipcnn_predict(model, context);
  return {reconstruction_quadrant_mse(context.values, original_window), reconstruction_quadrant_mse(target, original_window)};
}

std::string outcomes_csv(const std::vector<PredictionOutcome>& outcomes) {
  std::string out = "origin_x,origin_y,used_fallback,hevc_sse,ipcnn_sse\n";
  for (const auto& o : outcomes) {
    out += std::to_string(o.pu_origin.x) + "," + std::to_string(o.pu_origin.y) + "," + (o.used_fallback ? "1" : "0") +
           "," + std::to_string(o.hevc_sse) + "," + std::to_string(o.ipcnn_sse) + "\n";
  }
  return out;
}

}  // namespace ipcnn::pipeline
