#include <CLI11.hpp>
#include <iostream>

#include "ipcnn/cli.hpp"
#include "ipcnn/error.hpp"

namespace ipcnn::cli {

int run_cli(int argc, char** argv) {
  CLI::App app{"Learned intra prediction for an 8x8 block codec: corpus extraction, training, evaluation"};
  app.require_subcommand(1);

  ExtractOptions extract;
  auto* extract_cmd = app.add_subcommand("extract", "Build a training dataset from a corpus manifest");
  extract_cmd->add_option("--manifest", extract.manifest, "Corpus manifest")->required();
  extract_cmd->add_option("--qp", extract.qp, "Quantization parameter")->required()->check(CLI::Range(0, 51));
  extract_cmd->add_option("--out", extract.out, "Dataset file to write")->required();

  TrainOptions train;
  std::string train_manifest;
  int train_qp = -1;
  std::uint64_t seed = 0;
  int epochs = 0;
  double lr = 0.0;
  auto* train_cmd = app.add_subcommand("train", "Train one per-QP network");
  train_cmd->add_option("--dataset", train.dataset, "Dataset file")->required();
  auto* train_qp_opt = train_cmd->add_option("--qp", train_qp, "Expected dataset QP")->check(CLI::Range(0, 51));
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  auto* train_manifest_opt = train_cmd->add_option("--manifest", train_manifest, "Manifest with @seed/@set overrides");
  auto* seed_opt = train_cmd->add_option("--seed", seed, "RNG seed");
  auto* epochs_opt = train_cmd->add_option("--epochs", epochs, "Epoch count")->check(CLI::PositiveNumber);
  auto* lr_opt = train_cmd->add_option("--lr", lr, "Learning rate")->check(CLI::PositiveNumber);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Encode a corpus with the networks and report reconstruction/PU MSE");
  eval_cmd->add_option("--manifest", eval.manifest, "Corpus manifest")->required();
  eval_cmd->add_option("--model", eval.models, "Model file (repeatable, one per QP)")->required();
  eval_cmd->add_option("--qp", eval.qps, "QPs to evaluate (repeatable)")->check(CLI::Range(0, 51));
  eval_cmd->add_option("--out", eval.out, "Report CSV to write")->required();

  PredictOptions predict;
  std::string format_name = "pgm";
  int predict_qp = -1;
  auto* predict_cmd = app.add_subcommand("predict", "Code one frame with the network prediction");
  predict_cmd->add_option("input", predict.input, "Input frame")->required();
  predict_cmd->add_option("--model", predict.model, "Model file")->required();
  predict_cmd->add_option("--format", format_name, "raw-y, yuv420 or pgm");
  predict_cmd->add_option("--width", predict.width, "Frame width (0 = pgm header)");
  predict_cmd->add_option("--height", predict.height, "Frame height (0 = pgm header)");
  predict_cmd->add_option("--frame", predict.frame, "Frame index for yuv420");
  auto* predict_qp_opt = predict_cmd->add_option("--qp", predict_qp, "QP (defaults to the model's)")->check(CLI::Range(0, 51));
  predict_cmd->add_option("--out", predict.out, "Reconstructed raw-y output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*extract_cmd) {
      run_extract(extract, std::cout);
    } else if (*train_cmd) {
      if (*train_qp_opt) train.qp = train_qp;
      if (*train_manifest_opt) train.manifest = train_manifest;
      if (*seed_opt) train.overrides.seed = seed;
      if (*epochs_opt) train.overrides.epochs = epochs;
      if (*lr_opt) train.overrides.learning_rate = lr;
      run_train(train, std::cout);
    } else if (*eval_cmd) {
      run_eval(eval, std::cout);
    } else if (*predict_cmd) {
      const auto format = io::parse_format(format_name);
      if (!format) throw Error(ErrorCode::kInvalidArgument, "--format '" + format_name + "' is not raw-y, yuv420 or pgm");
      predict.format = *format;
      if (*predict_qp_opt) predict.qp = predict_qp;
      run_predict(predict, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace ipcnn::cli
