#include "ipcnn/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "ipcnn/error.hpp"

namespace ipcnn::nn {

std::string Shape::to_string() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                                               shape_.to_string());
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace ipcnn::nn
