#include "ipcnn/nn/model_io.hpp"

#include "ipcnn/binary_io.hpp"
#include "ipcnn/error.hpp"

namespace ipcnn::nn {

namespace {

constexpr std::string_view kMagic = "IPCN";
constexpr std::uint32_t kConvTag = 1;
constexpr std::uint32_t kBatchNormTag = 2;
constexpr std::uint32_t kMaxChannels = 4096;

void put_values(ByteWriter& w, const std::vector<double>& values) {
  for (double v : values) w.put_f32(static_cast<float>(v));
}

void get_values(ByteReader& r, std::vector<double>& values, std::size_t count) {
  values.resize(count);
  for (double& v : values) v = r.get_f32();
}

}  // namespace

std::string serialize_model(const IpcnnModel& model) {
  model.validate();
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(kModelVersion);
  w.put_u32(static_cast<std::uint32_t>(model.qp));
  w.put_u32(static_cast<std::uint32_t>(model.layers.size() + model.batchnorm_count()));
  for (const auto& layer : model.layers) {
    w.put_u32(kConvTag);
    w.put_u32(static_cast<std::uint32_t>(layer.conv.out_channels));
    w.put_u32(static_cast<std::uint32_t>(layer.conv.in_channels));
    w.put_u32(kKernel);
    w.put_u32(kKernel);
    put_values(w, layer.conv.weights);
    put_values(w, layer.conv.bias);
    if (layer.bn) {
      w.put_u32(kBatchNormTag);
      w.put_u32(static_cast<std::uint32_t>(layer.bn->channels));
      put_values(w, layer.bn->gamma);
      put_values(w, layer.bn->beta);
      put_values(w, layer.bn->running_mean);
      put_values(w, layer.bn->running_var);
    }
  }
  return w.bytes();
}

IpcnnModel parse_model(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, source);
  if (bytes.size() < kMagic.size() || r.get_bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kMagicMismatch, source + " is not an IPCN model file");
  }
  const auto version = r.get_u32();
  if (version != kModelVersion) {
    throw Error(ErrorCode::kVersionMismatch, source + " has model version " + std::to_string(version));
  }
  IpcnnModel model;
  model.qp = static_cast<int>(r.get_u32());
  const auto entries = r.get_u32();
  auto bad_shape = [&](const std::string& why) { return Error(ErrorCode::kShapeMismatch, source + ": " + why); };

  for (std::uint32_t e = 0; e < entries; ++e) {
    const auto tag = r.get_u32();
    if (tag == kConvTag) {
      const auto out = r.get_u32();
      const auto in = r.get_u32();
      const auto kh = r.get_u32();
      const auto kw = r.get_u32();
      if (kh != kKernel || kw != kKernel) throw bad_shape("conv kernel must be 3x3");
      if (out == 0 || in == 0 || out > kMaxChannels || in > kMaxChannels) throw bad_shape("conv channel count out of range");
      WeightLayer layer;
      layer.conv = ConvLayer(static_cast<int>(in), static_cast<int>(out));
      get_values(r, layer.conv.weights, static_cast<std::size_t>(out) * in * kKernelArea);
      get_values(r, layer.conv.bias, out);
      model.layers.push_back(std::move(layer));
    } else if (tag == kBatchNormTag) {
      if (model.layers.empty() || model.layers.back().bn) throw bad_shape("batch norm entry must follow a conv entry");
      const auto ch = r.get_u32();
      if (ch != static_cast<std::uint32_t>(model.layers.back().conv.out_channels)) {
        throw bad_shape("batch norm channels do not match preceding conv");
      }
      BatchNormLayer bn(static_cast<int>(ch));
      get_values(r, bn.gamma, ch);
      get_values(r, bn.beta, ch);
      get_values(r, bn.running_mean, ch);
      get_values(r, bn.running_var, ch);
      model.layers.back().bn = std::move(bn);
    } else {
      throw bad_shape("unknown layer tag " + std::to_string(tag));
    }
  }
  if (r.remaining() != 0) throw bad_shape("trailing bytes after last layer");
  if (model.layers.size() < 2) throw bad_shape("model needs at least two conv layers");

  model.arch.depth = static_cast<int>(model.layers.size());
  model.arch.image_channels = model.layers.front().conv.in_channels;
  model.arch.channels = model.layers.front().conv.out_channels;
  for (std::size_t i = 0; i < model.layers.size(); ++i) model.layers[i].relu = i + 1 < model.layers.size();
  try {
    model.validate();
  } catch (const Error& err) {
    throw bad_shape(err.what());
  }
  return model;
}

void save_model(const IpcnnModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

IpcnnModel load_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_model(bytes, path.string());
}

IpcnnModel round_to_stored_precision(const IpcnnModel& model) {
  IpcnnModel out = model;
  auto round_all = [](std::vector<double>& v) {
    for (double& x : v) x = static_cast<float>(x);
  };
  for (auto& l : out.layers) {
    round_all(l.conv.weights);
    round_all(l.conv.bias);
    if (l.bn) {
      round_all(l.bn->gamma);
      round_all(l.bn->beta);
      round_all(l.bn->running_mean);
      round_all(l.bn->running_var);
    }
  }
  return out;
}

}  // namespace ipcnn::nn
