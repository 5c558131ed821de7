#include <charconv>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "ipcnn/binary_io.hpp"
#include "ipcnn/cli.hpp"
#include "ipcnn/error.hpp"
#include "ipcnn/nn/model_io.hpp"

namespace ipcnn::cli {

namespace {

std::string percent_change(double before, double after) {
  if (before == 0.0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f%%", 100.0 * (after - before) / before);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::size_t run_extract(const ExtractOptions& options, std::ostream& log) {
  const codec::Qp qp(options.qp);
  const RunManifest manifest = load_manifest(options.manifest);
  const auto corpus = load_corpus(manifest);
  const data::Dataset dataset = data::build_dataset(corpus, qp);
  data::write_dataset(options.out, dataset);
  log << "extracted " << dataset.records.size() << " samples at qp " << qp.value() << " from " << corpus.size()
      << " planes -> " << options.out.string() << "\n";
  return dataset.records.size();
}

fs::path training_log_path(const fs::path& model_path) {
  fs::path p = model_path;
  return p.replace_extension(".log.csv");
}

nn::TrainResult run_train(const TrainOptions& options, std::ostream& log) {
  const data::Dataset dataset = data::read_dataset(options.dataset);
  if (options.qp && *options.qp != dataset.qp) {
    throw Error(ErrorCode::kQpMismatch, "--qp " + std::to_string(*options.qp) + " but " + options.dataset.string() +
                                            " was extracted at qp " + std::to_string(dataset.qp));
  }
  if (dataset.records.empty()) throw Error(ErrorCode::kDatasetEmpty, options.dataset.string() + " holds no samples");

  RunManifest manifest;
  if (options.manifest) manifest = load_manifest(*options.manifest);
  const nn::TrainConfig config = make_train_config(manifest.overrides, manifest.seed, options.overrides);

  log << "training qp " << dataset.qp << " on " << dataset.records.size() << " samples, " << config.epochs
      << " epochs, lr " << format_real(config.learning_rate) << ", seed " << config.seed << "\n";
  nn::TrainResult result = nn::train(dataset, config, [&](const nn::EpochLog& e) {
    log << "epoch " << e.epoch << " batch " << e.batch_size << " train " << format_real(e.train_loss) << " holdout "
        << format_real(e.holdout_loss) << "\n";
    log.flush();
  });
  nn::save_model(result.model, options.out);
  write_file_atomic(training_log_path(options.out), nn::training_log_csv(result.log));
  log << "model -> " << options.out.string() << ", log -> " << training_log_path(options.out).string() << "\n";
  return result;
}

std::vector<EvalRow> evaluate_corpus(const std::vector<io::Plane>& corpus, const pipeline::ModelRegistry& registry,
                                     const std::vector<int>& qps) {
  std::vector<EvalRow> rows;
  for (const int q : qps) {
    const codec::Qp qp(q);
    EvalRow row;
    row.qp = q;
    for (const auto& plane : corpus) {
      const auto encoded = pipeline::encode_with_ipcnn(plane, qp, registry);
      for (const auto& outcome : encoded.outcomes) {
        if (outcome.used_fallback) continue;
        const auto window = data::original_window(plane, outcome.pu_origin);
        row.original_mse += pipeline::reconstruction_quadrant_mse(*outcome.context, window);
        row.target_mse += pipeline::reconstruction_quadrant_mse(*outcome.refined_context, window);
        row.pu_hevc_mse += static_cast<double>(outcome.hevc_sse) / codec::kBlockArea;
        row.pu_ipcnn_mse += static_cast<double>(outcome.ipcnn_sse) / codec::kBlockArea;
        ++row.n_samples;
      }
    }
    if (row.n_samples > 0) {
      const double n = static_cast<double>(row.n_samples);
      row.original_mse /= n;
      row.target_mse /= n;
      row.pu_hevc_mse /= n;
      row.pu_ipcnn_mse /= n;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<EvalRow> run_eval(const EvalOptions& options, std::ostream& summary) {
  const RunManifest manifest = load_manifest(options.manifest);
  pipeline::ModelRegistry registry;
  for (const auto& path : options.models) registry.add(nn::load_model(path));
  std::vector<int> qps = options.qps;
  if (qps.empty()) qps = manifest.qps;
  if (qps.empty()) qps = registry.qps();
  for (const int q : qps) registry.at(codec::Qp(q));  // fail before any work

  const auto corpus = load_corpus(manifest);
  const auto rows = evaluate_corpus(corpus, registry, qps);
  write_file_atomic(options.out, eval_report_csv(rows));
  print_eval_summary(rows, summary);
  summary << "report -> " << options.out.string() << "\n";
  return rows;
}

std::string eval_report_csv(const std::vector<EvalRow>& rows) {
  std::string out = "qp,n_samples,original_mse,target_mse,pu_hevc_mse,pu_ipcnn_mse\n";
  for (const auto& r : rows) {
    out += std::to_string(r.qp) + "," + std::to_string(r.n_samples) + "," + format_real(r.original_mse) + "," +
           format_real(r.target_mse) + "," + format_real(r.pu_hevc_mse) + "," + format_real(r.pu_ipcnn_mse) + "\n";
  }
  return out;
}

std::vector<EvalRow> parse_eval_report(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "qp,n_samples,original_mse,target_mse,pu_hevc_mse,pu_ipcnn_mse") {
    throw Error(ErrorCode::kInvalidArgument, "unexpected report header '" + line + "'");
  }
  std::vector<EvalRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw Error(ErrorCode::kInvalidArgument, "malformed report row '" + line + "'");
    EvalRow r;
    auto num = [&](const std::string& s, auto& dst) {
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), dst);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::kInvalidArgument, "malformed report value '" + s + "'");
      }
    };
    num(f[0], r.qp);
    num(f[1], r.n_samples);
    num(f[2], r.original_mse);
    num(f[3], r.target_mse);
    num(f[4], r.pu_hevc_mse);
    num(f[5], r.pu_ipcnn_mse);
    rows.push_back(r);
  }
  return rows;
}

void print_eval_summary(const std::vector<EvalRow>& rows, std::ostream& out) {
  out << "qp   samples  recon-quadrant MSE (orig -> target)      PU MSE (hevc -> ipcnn)\n";
  for (const auto& r : rows) {
    out << r.qp << "   " << r.n_samples << "   " << fixed(r.original_mse, 3) << " -> " << fixed(r.target_mse, 3) << " ("
        << percent_change(r.original_mse, r.target_mse) << ")   " << fixed(r.pu_hevc_mse, 3) << " -> "
        << fixed(r.pu_ipcnn_mse, 3) << " (" << percent_change(r.pu_hevc_mse, r.pu_ipcnn_mse) << ")\n";
  }
  if (!rows.empty()) {
    double o = 0, t = 0, h = 0, p = 0;
    for (const auto& r : rows) {
      o += r.original_mse;
      t += r.target_mse;
      h += r.pu_hevc_mse;
      p += r.pu_ipcnn_mse;
    }
    const double n = static_cast<double>(rows.size());
    out << "average  recon-quadrant " << fixed(o / n, 3) << " -> " << fixed(t / n, 3) << " ("
        << percent_change(o, t) << "), PU " << fixed(h / n, 3) << " -> " << fixed(p / n, 3) << " ("
        << percent_change(h, p) << ")\n";
  }
}

fs::path outcomes_path(const fs::path& out) {
  fs::path p = out;
  return p.replace_extension(".outcomes.csv");
}

pipeline::EncodeResult run_predict(const PredictOptions& options, std::ostream& log) {
  const nn::IpcnnModel model = nn::load_model(options.model);
  const int q = options.qp.value_or(model.qp);
  pipeline::ModelRegistry registry;
  registry.add(model);
  const io::Plane plane = io::load_luma(options.input, options.width, options.height, options.format, options.frame);
  auto result = pipeline::encode_with_ipcnn(plane, codec::Qp(q), registry);
  io::write_raw_y(options.out, result.recon);
  write_file_atomic(outcomes_path(options.out), pipeline::outcomes_csv(result.outcomes));
  log << "coded " << plane.width() << "x" << plane.height() << " at qp " << q << " -> " << options.out.string() << " and "
      << outcomes_path(options.out).string() << "\n";
  return result;
}

}  // namespace ipcnn::cli
