#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipcnn/media_io.hpp"
#include "ipcnn/nn/train.hpp"
#include "ipcnn/pipeline.hpp"

namespace ipcnn::cli {

namespace fs = std::filesystem;

struct CorpusEntry {
  fs::path path;
  io::LumaFormat format = io::LumaFormat::kPgm;
  int width = 0;
  int height = 0;
  int frame = 0;
};

// Line-oriented corpus description:
//
//   # comment
//   <path> <format> <width> <height> <frame-index>
//   @qp 22 27 32 37
//   @seed 7
//   @out results
//   @set lr 1e-4          (also: epochs, holdout, output_init fan_in|zero)
//
// Relative paths resolve against the manifest's directory. For pgm entries a
// width/height of 0 takes the header dimensions.
struct RunManifest {
  std::vector<CorpusEntry> corpus;
  std::vector<int> qps;
  fs::path output_dir;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> overrides;
};

RunManifest parse_manifest(const std::string& text, const fs::path& base_dir, const std::string& source);
// Parses and checks that every referenced file exists.
RunManifest load_manifest(const fs::path& path);

std::vector<io::Plane> load_corpus(const RunManifest& manifest);

// Applies manifest overrides, then explicit flags, on top of the defaults.
struct TrainOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
};
nn::TrainConfig make_train_config(const std::map<std::string, std::string>& manifest_overrides,
                                  std::optional<std::uint64_t> manifest_seed, const TrainOverrides& flags);

struct ExtractOptions {
  fs::path manifest;
  int qp = 22;
  fs::path out;
};
std::size_t run_extract(const ExtractOptions& options, std::ostream& log);

struct TrainOptions {
  fs::path dataset;
  std::optional<int> qp;
  fs::path out;
  std::optional<fs::path> manifest;
  TrainOverrides overrides;
};
fs::path training_log_path(const fs::path& model_path);
nn::TrainResult run_train(const TrainOptions& options, std::ostream& log);

struct EvalRow {
  int qp = 0;
  std::size_t n_samples = 0;
  double original_mse = 0.0;
  double target_mse = 0.0;
  double pu_hevc_mse = 0.0;
  double pu_ipcnn_mse = 0.0;
};

struct EvalOptions {
  fs::path manifest;
  std::vector<fs::path> models;
  std::vector<int> qps;  // empty: manifest @qp list, else every loaded model
  fs::path out;
};

// Encodes every manifest plane with the QP's network and aggregates the
// non-fallback PUs into one row per QP.
std::vector<EvalRow> evaluate_corpus(const std::vector<io::Plane>& corpus, const pipeline::ModelRegistry& registry,
                                     const std::vector<int>& qps);
std::vector<EvalRow> run_eval(const EvalOptions& options, std::ostream& summary);

// qp,n_samples,original_mse,target_mse,pu_hevc_mse,pu_ipcnn_mse
std::string eval_report_csv(const std::vector<EvalRow>& rows);
std::vector<EvalRow> parse_eval_report(const std::string& csv);
void print_eval_summary(const std::vector<EvalRow>& rows, std::ostream& out);

struct PredictOptions {
  fs::path model;
  fs::path input;
  io::LumaFormat format = io::LumaFormat::kPgm;
  int width = 0;
  int height = 0;
  int frame = 0;
  std::optional<int> qp;
  fs::path out;
};
fs::path outcomes_path(const fs::path& out);
pipeline::EncodeResult run_predict(const PredictOptions& options, std::ostream& log);

// Entry point used by the ipcnn binary; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace ipcnn::cli
