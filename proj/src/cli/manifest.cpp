#include <charconv>
#include <sstream>

#include "ipcnn/binary_io.hpp"
#include "ipcnn/cli.hpp"
#include "ipcnn/error.hpp"

namespace ipcnn::cli {

namespace {

template <typename T>
std::optional<T> parse_number(const std::string& token) {
  T value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, source + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

RunManifest parse_manifest(const std::string& text, const fs::path& base_dir, const std::string& source) {
  RunManifest manifest;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;

    if (tokens[0] == "@qp") {
      if (tokens.size() < 2) fail(source, line_no, "@qp needs at least one value");
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto qp = parse_number<int>(tokens[i]);
        if (!qp || *qp < 0 || *qp > 51) fail(source, line_no, "qp '" + tokens[i] + "' outside [0,51]");
        manifest.qps.push_back(*qp);
      }
    } else if (tokens[0] == "@seed") {
      const auto seed = tokens.size() == 2 ? parse_number<std::uint64_t>(tokens[1]) : std::nullopt;
      if (!seed) fail(source, line_no, "@seed needs one unsigned integer");
      manifest.seed = *seed;
    } else if (tokens[0] == "@out") {
      if (tokens.size() != 2) fail(source, line_no, "@out needs one path");
      manifest.output_dir = base_dir / tokens[1];
    } else if (tokens[0] == "@set") {
      if (tokens.size() != 3) fail(source, line_no, "@set needs a key and a value");
      if (tokens[1] != "lr" && tokens[1] != "epochs" && tokens[1] != "holdout" && tokens[1] != "output_init") {
        fail(source, line_no, "unknown override '" + tokens[1] + "'");
      }
      manifest.overrides[tokens[1]] = tokens[2];
    } else if (tokens[0].front() == '@') {
      fail(source, line_no, "unknown directive '" + tokens[0] + "'");
    } else {
      if (tokens.size() != 5) fail(source, line_no, "expected: <path> <format> <width> <height> <frame>");
      CorpusEntry entry;
      entry.path = base_dir / tokens[0];
      const auto format = io::parse_format(tokens[1]);
      if (!format) fail(source, line_no, "unknown format '" + tokens[1] + "'");
      entry.format = *format;
      const auto w = parse_number<int>(tokens[2]);
      const auto h = parse_number<int>(tokens[3]);
      const auto f = parse_number<int>(tokens[4]);
      if (!w || !h || !f || *w < 0 || *h < 0 || *f < 0) fail(source, line_no, "width/height/frame must be non-negative integers");
      entry.width = *w;
      entry.height = *h;
      entry.frame = *f;
      manifest.corpus.push_back(entry);
    }
  }
  return manifest;
}

RunManifest load_manifest(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  const std::string text(bytes.begin(), bytes.end());
  RunManifest manifest = parse_manifest(text, path.parent_path(), path.string());
  for (const auto& entry : manifest.corpus) {
    std::error_code ec;
    if (!fs::is_regular_file(entry.path, ec)) {
      throw Error(ErrorCode::kFileMissing, entry.path.string() + " (listed in " + path.string() + ")");
    }
  }
  return manifest;
}

std::vector<io::Plane> load_corpus(const RunManifest& manifest) {
  std::vector<io::Plane> planes;
  planes.reserve(manifest.corpus.size());
  for (const auto& e : manifest.corpus) planes.push_back(io::load_luma(e.path, e.width, e.height, e.format, e.frame));
  return planes;
}

nn::TrainConfig make_train_config(const std::map<std::string, std::string>& manifest_overrides,
                                  std::optional<std::uint64_t> manifest_seed, const TrainOverrides& flags) {
  nn::TrainConfig config;
  for (const auto& [key, value] : manifest_overrides) {
    if (key == "lr") {
      const auto lr = parse_number<double>(value);
      if (!lr) throw Error(ErrorCode::kInvalidConfig, "manifest @set lr '" + value + "' is not a number");
      config.learning_rate = *lr;
    } else if (key == "epochs") {
      const auto epochs = parse_number<int>(value);
      if (!epochs) throw Error(ErrorCode::kInvalidConfig, "manifest @set epochs '" + value + "' is not an integer");
      config.epochs = *epochs;
    } else if (key == "holdout") {
      const auto fraction = parse_number<double>(value);
      if (!fraction) throw Error(ErrorCode::kInvalidConfig, "manifest @set holdout '" + value + "' is not a number");
      config.holdout_fraction = *fraction;
    } else if (key == "output_init") {
      if (value == "fan_in") {
        config.output_init = nn::OutputInit::kFanIn;
      } else if (value == "zero") {
        config.output_init = nn::OutputInit::kZero;
      } else {
        throw Error(ErrorCode::kInvalidConfig, "manifest @set output_init '" + value + "' is not fan_in or zero");
      }
    }
  }
  if (manifest_seed) config.seed = *manifest_seed;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.epochs) config.epochs = *flags.epochs;
  if (flags.learning_rate) config.learning_rate = *flags.learning_rate;
  if (config.epochs < 1) throw Error(ErrorCode::kInvalidConfig, "--epochs must be >= 1");
  config.batch_schedule = nn::halving_schedule(config.epochs);
  config.validate();
  return config;
}

}  // namespace ipcnn::cli
