// Acceptance runner. Each check prints one PASS/FAIL line; the exit code is
// nonzero if any selected check fails.
//
//   ipcnn_acceptance                      checks 1-7 and 9
//   ipcnn_acceptance --only 3,5           a subset
//   ipcnn_acceptance --only 8 --corpus D  the corpus-scale run (hours)

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "ipcnn/cli.hpp"
#include "ipcnn/dataset.hpp"
#include "ipcnn/intra_codec.hpp"
#include "ipcnn/nn/layers.hpp"
#include "ipcnn/nn/model.hpp"
#include "ipcnn/nn/train.hpp"
#include "ipcnn/pipeline.hpp"
#include "oracles/naive_intra.hpp"
#include "oracles/naive_nn.hpp"
#include "support.hpp"

using namespace ipcnn;
namespace fs = std::filesystem;
using codec::Qp;
using io::Plane;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

nn::Tensor random_tensor(nn::Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  nn::Tensor t(s);
  for (double& v : t.data()) v = d(rng);
  return t;
}

double max_abs_diff(const nn::Tensor& a, const nn::Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

Outcome gradient_oracle() {
  nn::Architecture arch;
  arch.depth = 2;
  arch.channels = 4;
  arch.height = 6;
  arch.width = 6;
  nn::IpcnnModel model = nn::IpcnnModel::create(arch, 22, 7);
  // nonzero biases so no parameter sits at a trivial point
  for (auto& l : model.layers)
    for (double& b : l.conv.bias) b = 0.05;
  std::mt19937_64 rng(8);
  const nn::Tensor x = random_tensor({2, 1, 6, 6}, rng, 0.0, 1.0);
  const nn::Tensor t = random_tensor({2, 1, 6, 6}, rng, -0.1, 0.1);

  const auto analytic = nn::compute_gradients(model, x, t);
  const auto grads = nn::gradient_views(analytic.grads);
  auto params = nn::parameter_views(model);
  const double h = 1e-5;
  double worst = 0.0;
  std::size_t checked = 0, tiny = 0;
  for (std::size_t g = 0; g < params.size(); ++g) {
    for (std::size_t i = 0; i < params[g].size(); ++i) {
      const double keep = params[g][i];
      params[g][i] = keep + h;
      const double up = nn::compute_gradients(model, x, t).loss;
      params[g][i] = keep - h;
      const double down = nn::compute_gradients(model, x, t).loss;
      params[g][i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max(std::abs(numeric), std::abs(grads[g][i]));
      if (scale < 1e-10) {
        ++tiny;  // both zero, e.g. a dead ReLU channel
        continue;
      }
      worst = std::max(worst, std::abs(numeric - grads[g][i]) / scale);
      ++checked;
    }
  }
  return {worst < 1e-4, std::to_string(checked) + " parameters, " + std::to_string(tiny) +
                            " with zero gradient, worst relative error " + fmt(worst, 3)};
}

Outcome layer_oracles() {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(1, 4), side(2, 9);
  double worst_conv = 0.0, worst_bn = 0.0, worst_relu = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(dim(rng)), c = static_cast<std::size_t>(dim(rng));
    const std::size_t h = static_cast<std::size_t>(side(rng)), w = static_cast<std::size_t>(side(rng));
    const nn::Tensor x = random_tensor({n, c, h, w}, rng, -2.0, 2.0);

    nn::ConvLayer conv(static_cast<int>(c), dim(rng));
    std::uniform_real_distribution<double> p(-0.5, 0.5);
    for (double& v : conv.weights) v = p(rng);
    for (double& v : conv.bias) v = p(rng);
    worst_conv = std::max(worst_conv, max_abs_diff(nn::conv2d_forward(x, conv), test::naive::conv(x, conv)));

    nn::BatchNormLayer bn(static_cast<int>(c));
    std::uniform_real_distribution<double> pos(0.2, 2.0);
    for (std::size_t k = 0; k < c; ++k) {
      bn.gamma[k] = p(rng) * 4.0;
      bn.beta[k] = p(rng);
      bn.running_mean[k] = p(rng);
      bn.running_var[k] = pos(rng);
    }
    const nn::BatchNormLayer& frozen = bn;
    worst_bn = std::max(worst_bn, max_abs_diff(nn::batchnorm_forward(x, frozen, nn::Mode::kInfer),
                                               test::naive::batchnorm(x, bn, false)));
    if (n * h * w >= 2 && n >= 2) {
      worst_bn = std::max(worst_bn, max_abs_diff(nn::batchnorm_forward(x, frozen, nn::Mode::kTrain),
                                                 test::naive::batchnorm(x, bn, true)));
    }
    worst_relu = std::max(worst_relu, max_abs_diff(nn::relu(x), test::naive::relu(x)));
  }
  const bool pass = worst_conv < 1e-12 && worst_bn < 1e-12 && worst_relu < 1e-12;
  return {pass, "worst |diff| conv " + fmt(worst_conv, 3) + ", bn " + fmt(worst_bn, 3) + ", relu " +
                    fmt(worst_relu, 3)};
}

// Block content for the mode search: half the cases are uniform noise, the
// rest smooth surfaces continuing the references, where ties are common.
Outcome mode_selection_oracle() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> byte(0, 255), small(-3, 3), slope(-6, 6);
  int mismatches = 0, ties_seen = 0;
  std::array<int, 35> picked{};
  for (int trial = 0; trial < 500; ++trial) {
    codec::RefSamples refs;
    refs.available.fill(true);
    codec::Block8 block{};
    if (trial % 2 == 0) {
      for (auto& v : refs.left) v = byte(rng);
      for (auto& v : refs.top) v = byte(rng);
      refs.corner = byte(rng);
      for (auto& v : block) v = byte(rng);
    } else {
      const int base = byte(rng), gx = slope(rng), gy = slope(rng);
      const bool noisy = trial % 4 == 1;
      auto surface = [&](int x, int y) { return std::clamp(base + gx * x + gy * y + (noisy ? small(rng) : 0), 0, 255); };
      for (int i = 0; i < 16; ++i) {
        refs.left[i] = surface(-1, i);
        refs.top[i] = surface(i, -1);
      }
      refs.corner = surface(-1, -1);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) block[y * 8 + x] = surface(x, y);
    }
    const auto got = codec::select_best_mode(block, refs);
    const auto want = test::naive::best_mode(block, refs.left, refs.corner, refs.top);
    if (got.mode.index() != want.mode || got.sse != want.sse) ++mismatches;
    ++picked[static_cast<std::size_t>(want.mode)];

    int at_min = 0;
    const auto p = test::naive::make_refs(refs.left, refs.corner, refs.top);
    for (int m = 0; m < 35; ++m) {
      const auto pred = test::naive::predict(test::naive::filtered(p, m), m);
      std::int64_t s = 0;
      for (int i = 0; i < 64; ++i) s += static_cast<std::int64_t>(block[i] - pred[i]) * (block[i] - pred[i]);
      at_min += s == want.sse;
    }
    ties_seen += at_min > 1;
  }
  const int distinct = static_cast<int>(std::count_if(picked.begin(), picked.end(), [](int v) { return v > 0; }));
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 500 blocks (" + std::to_string(ties_seen) +
                               " with tied minima, " + std::to_string(distinct) + " distinct winning modes)"};
}

Outcome quantizer_bound() {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> r(-255, 255);
  double worst_ratio = 0.0;
  for (int q : {4, 22, 37}) {
    const Qp qp(q);
    for (int trial = 0; trial < 1000; ++trial) {
      codec::Block8 residual{};
      for (auto& v : residual) v = r(rng);
      std::array<double, 64> as_double{};
      for (int i = 0; i < 64; ++i) as_double[i] = residual[i];
      const auto coeffs = codec::forward_dct(as_double);
      const auto levels = codec::transform_quantize(residual, qp);
      for (int i = 0; i < 64; ++i) {
        const double back = levels[i] * qp.qstep();
        worst_ratio = std::max(worst_ratio, std::abs(back - coeffs[i]) / qp.qstep());
      }
    }
  }
  const bool bound = worst_ratio <= 0.5 + 1e-12;

  // Constant planes, every 8-bit level, every QP.
  int lossy = 0, total = 0;
  std::string first_lossy;
  for (int v = 0; v < 256; ++v) {
    const Plane p(32, 16, static_cast<std::uint8_t>(v));
    for (int q = 0; q <= 51; ++q) {
      ++total;
      if (codec::reconstruct_plane(p, Qp(q)).recon != p) {
        if (lossy++ == 0) first_lossy = "level " + std::to_string(v) + " at qp " + std::to_string(q);
      }
    }
  }
  std::string detail = "worst |dequant(quant(c)) - c| = " + fmt(worst_ratio, 4) + " qstep over 3000 blocks; " +
                       std::to_string(total - lossy) + "/" + std::to_string(total) + " constant planes lossless";
  if (lossy > 0) detail += " (first lossy: " + first_lossy + ")";
  return {bound && lossy == 0, detail};
}

Outcome zero_model_equivalence() {
  pipeline::ModelRegistry registry;
  for (int q : {22, 27, 32, 37}) {
    auto m = nn::IpcnnModel::create(nn::Architecture::ipcnn(), q, static_cast<std::uint64_t>(q));
    test::zero_last_layer(m);
    registry.add(std::move(m));
  }
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> blocks(2, 5);
  int differing = 0, compared = 0;
  for (int i = 0; i < 10; ++i) {
    const int w = 8 * blocks(rng), h = 8 * blocks(rng);
    const Plane plane = i % 2 == 0 ? test::random_plane(w, h, 100 + i) : test::textured_plane(w, h, 100 + i);
    for (int q : {22, 27, 32, 37}) {
      const auto enc = pipeline::encode_with_ipcnn(plane, Qp(q), registry);
      const auto ref = codec::reconstruct_plane(plane, Qp(q));
      bool same = enc.recon == ref.recon && enc.outcomes.size() == ref.records.size();
      for (std::size_t k = 0; same && k < ref.records.size(); ++k) {
        same = enc.outcomes[k].ipcnn_sse == ref.records[k].sse && enc.outcomes[k].hevc_sse == ref.records[k].sse;
      }
      differing += !same;
      ++compared;
    }
  }
  return {differing == 0, std::to_string(compared - differing) + "/" + std::to_string(compared) +
                              " plane/qp pairs bit-identical to the plain codec"};
}

Outcome overfit_single_sample() {
  const Plane plane = test::textured_plane(16, 16, 61);
  const auto samples = data::build_samples(plane, Qp(37));
  data::Dataset ds;
  ds.qp = 37;
  for (const auto& s : samples) ds.records.push_back(data::to_record(s));
  nn::TrainConfig config;
  config.epochs = 2000;
  config.batch_schedule = {{1, 2000, 128}};
  config.holdout_fraction = 0.0;
  config.learning_rate = 1e-4;
  int reached = 0;
  double last = 0.0;
  const auto result = nn::train(ds, config, [&](const nn::EpochLog& e) {
    last = e.train_loss;
    if (reached == 0 && e.train_loss < 1e-4) reached = e.epoch;
  });
  (void)result;
  const std::string detail = reached > 0 ? "loss < 1e-4 at iteration " + std::to_string(reached) +
                                               ", final " + fmt(last, 3)
                                         : "loss after 2000 iterations " + fmt(last, 3);
  return {reached > 0, "1 sample (batch duplicated to 2), " + detail};
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "ipcnn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

// Small corpus for the CLI-driven checks: two pgm frames and a manifest.
fs::path write_small_corpus(const test::TempDir& dir) {
  io::write_pgm(dir / "a.pgm", test::textured_plane(40, 32, 71));
  io::write_pgm(dir / "b.pgm", test::textured_plane(32, 32, 72));
  std::ofstream(dir / "run.manifest") << "@qp 22\n@seed 3\na.pgm pgm 0 0 0\nb.pgm pgm 0 0 0\n";
  return dir / "run.manifest";
}

Outcome default_schedule() {
  test::TempDir dir("accept7");
  const fs::path manifest = write_small_corpus(dir);
  if (run({"extract", "--manifest", manifest.string(), "--qp", "22", "--out", (dir / "d.ipds").string()}) != 0) {
    return {false, "extract failed"};
  }
  if (run({"train", "--dataset", (dir / "d.ipds").string(), "--out", (dir / "m.ipcn").string()}) != 0) {
    return {false, "train failed"};
  }
  std::istringstream log(test::slurp(cli::training_log_path(dir / "m.ipcn")));
  std::string line;
  std::getline(log, line);
  int rows = 0, wrong = 0;
  while (std::getline(log, line)) {
    ++rows;
    const int epoch = std::stoi(line.substr(0, line.find(',')));
    const int batch = std::stoi(line.substr(line.find(',') + 1));
    const int want = epoch <= 10 ? 128 : epoch <= 20 ? 64 : 32;
    wrong += epoch != rows || batch != want;
  }
  return {rows == 30 && wrong == 0, std::to_string(rows) + " logged epochs, " + std::to_string(wrong) +
                                        " off the 128/64/32 schedule"};
}

Outcome determinism() {
  test::TempDir dir("accept9");
  const fs::path manifest = write_small_corpus(dir);
  auto twice = [&](const std::function<int(const std::string&)>& cmd) { return cmd("1") == 0 && cmd("2") == 0; };
  const bool ran =
      twice([&](const std::string& k) {
        return run({"extract", "--manifest", manifest.string(), "--qp", "22", "--out", (dir / ("d" + k + ".ipds")).string()});
      }) &&
      twice([&](const std::string& k) {
        return run({"train", "--dataset", (dir / "d1.ipds").string(), "--manifest", manifest.string(), "--epochs", "2",
                    "--out", (dir / ("m" + k + ".ipcn")).string()});
      }) &&
      twice([&](const std::string& k) {
        return run({"eval", "--manifest", manifest.string(), "--model", (dir / "m1.ipcn").string(), "--out",
                    (dir / ("r" + k + ".csv")).string()});
      }) &&
      twice([&](const std::string& k) {
        return run({"predict", (dir / "a.pgm").string(), "--model", (dir / "m1.ipcn").string(), "--out",
                    (dir / ("p" + k + ".y")).string()});
      });
  if (!ran) return {false, "a command failed"};
  int differing = 0;
  std::string which;
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{{"d1.ipds", "d2.ipds"},
                                                                             {"m1.ipcn", "m2.ipcn"},
                                                                             {"m1.log.csv", "m2.log.csv"},
                                                                             {"r1.csv", "r2.csv"},
                                                                             {"p1.y", "p2.y"},
                                                                             {"p1.outcomes.csv", "p2.outcomes.csv"}}) {
    const std::string x = test::slurp(dir / a), y = test::slurp(dir / b);
    if (x.empty() || x != y) {
      ++differing;
      which += " " + a;
    }
  }
  return {differing == 0, differing == 0 ? "dataset, model, log, report, reconstruction and outcomes byte-identical"
                                         : "differs:" + which};
}

// Corpus-scale run: extract, train with defaults and evaluate on the holdout
// for every QP. Expects train.manifest and holdout.manifest in corpus_dir.
Outcome corpus_refinement(const fs::path& corpus_dir, const fs::path& work_dir) {
  const fs::path train_manifest = corpus_dir / "train.manifest";
  const fs::path holdout_manifest = corpus_dir / "holdout.manifest";
  if (!fs::exists(train_manifest) || !fs::exists(holdout_manifest)) {
    return {false, "missing " + train_manifest.string() + " or " + holdout_manifest.string()};
  }
  fs::create_directories(work_dir);
  const auto train_entries = cli::load_manifest(train_manifest).corpus.size();
  const auto holdout_entries = cli::load_manifest(holdout_manifest).corpus.size();
  bool pass = train_entries >= 20;
  std::ostringstream detail;
  detail << train_entries << "+" << holdout_entries << " images;";
  const auto start = std::chrono::steady_clock::now();
  double reduction_sum = 0.0;
  for (int q : {22, 27, 32, 37}) {
    const std::string tag = std::to_string(q);
    const fs::path dataset = work_dir / ("train" + tag + ".ipds");
    const fs::path model = work_dir / ("model" + tag + ".ipcn");
    const std::size_t n_train = cli::run_extract({train_manifest, q, dataset}, std::cout);
    cli::TrainOptions train;
    train.dataset = dataset;
    train.qp = q;
    train.out = model;
    train.manifest = train_manifest;
    cli::run_train(train, std::cout);
    cli::EvalOptions eval;
    eval.manifest = holdout_manifest;
    eval.models = {model};
    eval.qps = {q};
    eval.out = work_dir / ("eval" + tag + ".csv");
    const auto rows = cli::run_eval(eval, std::cout);
    const auto& r = rows.at(0);
    const double reduction = 1.0 - r.target_mse / r.original_mse;
    reduction_sum += reduction;
    const bool ok = n_train >= 5000 && r.n_samples >= 1000 && r.target_mse < r.original_mse &&
                    r.pu_ipcnn_mse < r.pu_hevc_mse;
    pass = pass && ok;
    detail << " qp " << q << ": " << n_train << "/" << r.n_samples << " samples, recon " << fmt(r.original_mse) << "->"
           << fmt(r.target_mse) << " (" << fmt(100.0 * reduction, 3) << "%), pu " << fmt(r.pu_hevc_mse) << "->"
           << fmt(r.pu_ipcnn_mse) << (ok ? "" : " [short]") << ";";
    std::cout << "qp " << q << " done" << std::endl;
  }
  const double hours = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 3600.0;
  // each QP has to improve on its own; the 5% bar applies to the mean over QPs
  const double mean_reduction = reduction_sum / 4.0;
  detail << " mean reduction " << fmt(100.0 * mean_reduction, 3) << "%; " << fmt(hours, 3) << " h";
  return {pass && mean_reduction >= 0.05 && hours < 4.0, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ipcnn acceptance checks"};
  std::vector<int> only;
  std::string corpus;
  std::string work = "acceptance-work";
  app.add_option("--only", only, "check numbers to run")->delimiter(',');
  app.add_option("--corpus", corpus, "directory with train.manifest and holdout.manifest (check 8)");
  app.add_option("--work", work, "scratch directory for check 8 artifacts");
  CLI11_PARSE(app, argc, argv);
  if (only.empty()) only = {1, 2, 3, 4, 5, 6, 7, 9};

  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"gradient oracle", gradient_oracle},
      {"layer oracles", layer_oracles},
      {"mode selection oracle", mode_selection_oracle},
      {"quantizer bound and constant planes", quantizer_bound},
      {"zero-model equivalence", zero_model_equivalence},
      {"single-sample overfit", overfit_single_sample},
      {"default batch schedule", default_schedule},
      {"corpus refinement", [&] { return corpus_refinement(corpus, work); }},
      {"determinism", determinism},
  };
  int failed = 0;
  for (int id : only) {
    if (id < 1 || id > static_cast<int>(checks.size())) {
      std::cerr << "no check " << id << "\n";
      return 2;
    }
    const auto& [name, fn] = checks[static_cast<std::size_t>(id - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << " (" << fmt(secs, 3)
              << " s)" << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
