#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "ipcnn/nn/model.hpp"

namespace ipcnn::nn {

// "IPCN" | u32 version | u32 qp | u32 entry count | entries...
// Each entry is a u32 tag followed by u32 shape dims and float32 parameters:
//   conv (tag 1): out, in, 3, 3 | weights, bias
//   bn   (tag 2): channels      | gamma, beta, running_mean, running_var
// All integers and floats little-endian.
inline constexpr std::uint32_t kModelVersion = 1;

std::string serialize_model(const IpcnnModel& model);
IpcnnModel parse_model(std::span<const std::uint8_t> bytes, const std::string& source);

void save_model(const IpcnnModel& model, const std::filesystem::path& path);
IpcnnModel load_model(const std::filesystem::path& path);

// Rounds every stored quantity to float32, i.e. the state a save/load round-trip yields.
IpcnnModel round_to_stored_precision(const IpcnnModel& model);

}  // namespace ipcnn::nn
