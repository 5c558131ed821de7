#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipcnn/dataset.hpp"
#include "ipcnn/intra_codec.hpp"
#include "ipcnn/nn/model.hpp"

namespace ipcnn::pipeline {

using codec::BlockOrigin;
using codec::Plane;
using codec::Qp;
using data::Grid16;

// One network per QP. Lookups never fall back to a neighbouring QP.
class ModelRegistry {
 public:
  void add(nn::IpcnnModel model);
  bool contains(int qp) const { return models_.contains(qp); }
  const nn::IpcnnModel& at(Qp qp) const;
  std::vector<int> qps() const;

 private:
  std::map<int, nn::IpcnnModel> models_;
};

// clamp(Y - R(Y), 0, 1). The bottom-right quadrant is the replacement PU prediction.
Grid16 ipcnn_predict(const nn::IpcnnModel& model, const data::ContextBlock16& context);

// PU quadrant of a target block, back in 8-bit samples.
codec::Block8 target_pu_prediction(const Grid16& target);

struct PredictionOutcome {
  BlockOrigin pu_origin;
  codec::IntraMode hevc_mode;
  std::int64_t hevc_sse = 0;
  std::int64_t ipcnn_sse = 0;  // equals hevc_sse on fallback
  bool used_fallback = false;
  // Present only when the network ran.
  std::optional<Grid16> context;
  std::optional<Grid16> refined_context;
};

struct EncodeResult {
  Plane recon;
  std::vector<PredictionOutcome> outcomes;
};

// Raster coding as in codec::reconstruct_plane, except that every PU with a
// full 16x16 context codes its residual against the network's PU prediction.
// Context is taken from the in-progress reconstruction.
EncodeResult encode_with_ipcnn(const Plane& original, Qp qp, const ModelRegistry& registry);

// MSE over the three reconstruction quadrants, in 8-bit squared units.
double reconstruction_quadrant_mse(const Grid16& block, const Grid16& original);

struct RefinementMse {
  double original_mse = 0.0;
  double target_mse = 0.0;
};

RefinementMse refine_reconstructions(const nn::IpcnnModel& model, const data::ContextBlock16& context,
                                     const Grid16& original_window);

// origin_x,origin_y,used_fallback,hevc_sse,ipcnn_sse
std::string outcomes_csv(const std::vector<PredictionOutcome>& outcomes);

}  // namespace ipcnn::pipeline
