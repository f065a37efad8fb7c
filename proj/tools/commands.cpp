// Copyright 2026 The stainkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "stainkit/stainkit.hpp"

namespace stainkit::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string basis_path;
  double eps = kDefaultOdEpsilon;
  std::string out_path;
  bool json = false;
};

struct SeparateOptions {
  std::string in_path;
  std::string channel;
};

struct SsimFlags {
  std::size_t window = SsimParams{}.window_size;
  double sigma = SsimParams{}.gaussian_sigma;
  double k1 = SsimParams{}.k1;
  double k2 = SsimParams{}.k2;
  double range = SsimParams{}.dynamic_range;

  SsimParams params() const { return SsimParams{window, sigma, k1, k2, range}; }
};

struct MetricsOptions {
  std::string pred;
  std::string gt;
  SsimFlags ssim;
};

struct LossOptions {
  std::string pred;
  std::string gt;
  std::string h_features;
  std::string cmp_features;
  std::vector<double> probs;
  std::optional<std::size_t> target;
  double focal_alpha = 1.0;
  double focal_gamma = 2.0;
  std::optional<double> gan_512;
  std::optional<double> gan_256;
  LossComponents direct;
  LossWeights weights;
  SsimFlags ssim;
};

struct EvalOptions {
  std::string library;
  std::string queries;
  std::vector<std::size_t> topk{1, 3, 5};
  std::size_t knn = 10;
};

/// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kBadChannelCount:
    case ErrorCode::kUnwritablePath:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

fs::path temp_sibling(const fs::path& target) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  return tmp;
}

// Writes through a sibling temp file so a failed run never leaves a partial
// artifact at `target`.
template <typename Writer>
void write_atomically(const fs::path& target, Writer&& writer) {
  const fs::path tmp = temp_sibling(target);
  try {
    writer(tmp);
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::kUnwritablePath, target.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

void emit_json(const nlohmann::json& doc, const GlobalOptions& g, std::ostream& out) {
  const std::string text = report::canonical_json(doc) + "\n";
  if (!g.out_path.empty()) {
    write_atomically(g.out_path, [&](const fs::path& tmp) {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorCode::kUnwritablePath, g.out_path);
      f << text;
      if (!f.flush()) throw Error(ErrorCode::kUnwritablePath, g.out_path);
    });
  }
  if (g.out_path.empty() || g.json) out << text << std::flush;
}

StainBasis basis_from(const GlobalOptions& g) {
  return g.basis_path.empty() ? StainBasis::standard() : StainBasis::from_json_file(g.basis_path);
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 0.01)) throw UsageError("--eps must lie in (0, 0.01]");
}

std::vector<fs::path> png_files_in(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_separate(const SeparateOptions& o, const GlobalOptions& g, std::ostream& out,
                 std::ostream& err) {
  if (g.out_path.empty()) throw UsageError("separate requires --out");
  const ChannelSelector sel = ChannelSelector::parse(o.channel);
  check_eps(g.eps);
  const StainBasis basis = basis_from(g);

  const auto process = [&](const fs::path& in, const fs::path& dst) {
    const RgbImage img = load_image(in);
    const RgbImage result = isolate_channel(img, sel, basis, g.eps);
    write_atomically(dst, [&](const fs::path& tmp) { save_image(result, tmp); });
    return result;
  };

  if (!fs::is_directory(o.in_path)) {
    const RgbImage result = process(o.in_path, g.out_path);
    if (g.json) {
      out << report::canonical_json({{"channel", sel.name()},
                                     {"height", result.height()},
                                     {"width", result.width()},
                                     {"output", g.out_path}})
          << "\n";
    }
    return kExitOk;
  }

  // Batch mode: every PNG in the input directory, same file name in --out.
  const fs::path out_dir = g.out_path;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw Error(ErrorCode::kUnwritablePath, out_dir.string());
  const auto files = png_files_in(o.in_path);

  std::vector<std::string> failures(files.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        process(files[i], out_dir / files[i].filename());
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const unsigned threads =
      parallel_enabled() ? std::clamp(std::thread::hardware_concurrency(), 1u, 16u) : 1u;
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  int status = kExitOk;
  nlohmann::json outputs = nlohmann::json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!failures[i].empty()) {
      err << "error: " << failures[i] << "\n";
      status = kExitIo;
    } else {
      outputs.push_back((out_dir / files[i].filename()).string());
    }
  }
  if (g.json) out << report::canonical_json({{"channel", sel.name()}, {"outputs", outputs}}) << "\n";
  return status;
}

int cmd_metrics(const MetricsOptions& o, const GlobalOptions& g, std::ostream& out) {
  const RgbImage pred = load_image(o.pred);
  const RgbImage gt = load_image(o.gt);
  if (!pred.same_shape(gt)) throw Error(ErrorCode::kDimensionMismatch, "--pred and --gt differ in size");
  emit_json(report::to_json(metrics::evaluate(pred, gt, o.ssim.params())), g, out);
  return kExitOk;
}

void set_component(std::optional<double>& slot, double value, const char* name) {
  if (slot) throw UsageError(std::string("loss component '") + name + "' supplied twice");
  slot = value;
}

int cmd_loss(const LossOptions& o, const GlobalOptions& g, std::ostream& out) {
  check_eps(g.eps);
  LossComponents c = o.direct;

  if (o.pred.empty() != o.gt.empty()) throw UsageError("--pred and --gt must be given together");
  if (!o.pred.empty()) {
    const RgbImage pred = load_image(o.pred);
    const RgbImage gt = load_image(o.gt);
    if (!pred.same_shape(gt)) throw UsageError("--pred and --gt differ in size");
    set_component(c.ssim, loss::ssim_loss(pred, gt, o.ssim.params()), "ssim");
    set_component(c.mae, metrics::mae(pred, gt), "mae");
    set_component(c.dab, loss::dab_loss(pred, gt, basis_from(g), g.eps), "dab");
  }
  if (!o.h_features.empty()) {
    const auto [he, ihc] = read_vector_pair(o.h_features);
    set_component(c.h, loss::cosine_similarity(he, ihc).value, "h");
  }
  if (!o.cmp_features.empty()) {
    const auto [gen, ref] = read_vector_pair(o.cmp_features);
    set_component(c.cmp, loss::cosine_similarity(gen, ref).value, "cmp");
  }
  if (o.probs.empty() != !o.target.has_value()) throw UsageError("--probs and --target must be given together");
  if (o.target) {
    set_component(c.level, loss::focal(o.probs, *o.target, o.focal_alpha, o.focal_gamma).value, "level");
  }
  if (o.gan_512.has_value() != o.gan_256.has_value()) {
    throw UsageError("--gan-512 and --gan-256 must be given together");
  }
  if (o.gan_512) set_component(c.gan, loss::multiscale_gan(*o.gan_512, *o.gan_256), "gan");

  emit_json(report::to_json(loss::overall(c, o.weights)), g, out);
  return kExitOk;
}

int cmd_eval(const EvalOptions& o, const GlobalOptions& g, std::ostream& out) {
  const FeatureLibrary lib = her2::load_feature_library(o.library);
  const auto queries = her2::load_feature_records(o.queries);
  const auto topk = her2::topk_accuracy(lib, queries, o.topk);
  const double knn = her2::knn_accuracy(lib, queries, o.knn);
  emit_json(report::accuracy_report(topk, o.knn, knn), g, out);
  return kExitOk;
}

void add_ssim_flags(CLI::App& cmd, SsimFlags& s) {
  cmd.add_option("--ssim-window", s.window, "SSIM Gaussian window size (odd)")->capture_default_str();
  cmd.add_option("--ssim-sigma", s.sigma, "SSIM Gaussian sigma")->capture_default_str();
  cmd.add_option("--ssim-k1", s.k1, "SSIM luminance constant")->capture_default_str();
  cmd.add_option("--ssim-k2", s.k2, "SSIM contrast constant")->capture_default_str();
  cmd.add_option("--dynamic-range", s.range, "Intensity range L")->capture_default_str();
}

}  // namespace

bool parallel_enabled() {
  const char* v = std::getenv("STAIN_NO_PARALLEL");
  return !(v && std::string(v) == "1");
}

std::pair<std::vector<double>, std::vector<double>> read_vector_pair(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParseError, path.string() + ": bad number '" + field + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != 2) {
    throw Error(ErrorCode::kParseError, path.string() + ": expected exactly two feature rows");
  }
  return {std::move(rows[0]), std::move(rows[1])};
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stain separation, image metrics, loss kernels and HER2 evaluation", "stainkit"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--basis", g.basis_path, "JSON file with the 9 entries of the stain matrix (row-major)");
  app.add_option("--eps", g.eps, "Intensity floor applied before logarithms")->capture_default_str();
  app.add_option("--out", g.out_path, "Output path (PNG for separate, JSON report otherwise)");
  app.add_flag("--json", g.json, "Also print the JSON result on stdout");

  SeparateOptions sep;
  auto* separate = app.add_subcommand("separate", "Isolate stain channels of a PNG (or a directory of PNGs)");
  separate->add_option("--in", sep.in_path, "Input PNG or directory")->required();
  separate->add_option("--channel", sep.channel, "H, E, DAB, HE, HDAB or ALL")->required();

  MetricsOptions met;
  auto* metrics_cmd = app.add_subcommand("metrics", "SSIM / PSNR / MAE between two images");
  metrics_cmd->add_option("--pred", met.pred, "Generated image")->required();
  metrics_cmd->add_option("--gt", met.gt, "Ground-truth image")->required();
  add_ssim_flags(*metrics_cmd, met.ssim);

  LossOptions lo;
  auto* loss_cmd = app.add_subcommand("loss", "Weighted loss breakdown from images, features and scalars");
  loss_cmd->add_option("--pred", lo.pred, "Generated IHC image");
  loss_cmd->add_option("--gt", lo.gt, "Ground-truth IHC image");
  loss_cmd->add_option("--h-features", lo.h_features, "Two-row CSV: H-channel features of H&E and IHC");
  loss_cmd->add_option("--cmp-features", lo.cmp_features, "Two-row CSV: comparator features of generated and ground truth");
  loss_cmd->add_option("--probs", lo.probs, "Predicted HER2 level probabilities")->delimiter(',')->expected(4);
  loss_cmd->add_option("--target", lo.target, "True HER2 level (0-3)");
  loss_cmd->add_option("--focal-alpha", lo.focal_alpha, "Focal loss alpha")->capture_default_str();
  loss_cmd->add_option("--focal-gamma", lo.focal_gamma, "Focal loss gamma")->capture_default_str();
  loss_cmd->add_option("--gan-512", lo.gan_512, "Patch GAN loss at 512 px");
  loss_cmd->add_option("--gan-256", lo.gan_256, "Patch GAN loss at 256 px");
  loss_cmd->add_option("--value-h", lo.direct.h, "Precomputed Hematoxylin alignment loss");
  loss_cmd->add_option("--value-dab", lo.direct.dab, "Precomputed DAB loss");
  loss_cmd->add_option("--value-ssim", lo.direct.ssim, "Precomputed SSIM loss");
  loss_cmd->add_option("--value-mae", lo.direct.mae, "Precomputed MAE loss");
  loss_cmd->add_option("--value-cmp", lo.direct.cmp, "Precomputed comparator loss");
  loss_cmd->add_option("--value-level", lo.direct.level, "Precomputed HER2 level loss");
  loss_cmd->add_option("--value-gan", lo.direct.gan, "Precomputed GAN loss");
  auto& w = lo.weights;
  for (auto [name, slot] : {std::pair{"--w-stain", &w.stain}, {"--w-content", &w.content},
                            {"--w-level", &w.level}, {"--w-gan", &w.gan}, {"--w-h", &w.h},
                            {"--w-dab", &w.dab}, {"--w-ssim", &w.ssim}, {"--w-mae", &w.mae},
                            {"--w-cmp", &w.cmp}}) {
    loss_cmd->add_option(name, *slot, "Loss weight")->capture_default_str();
  }
  add_ssim_flags(*loss_cmd, lo.ssim);

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Top-k and kNN HER2 accuracy of query features");
  eval_cmd->add_option("--library", ev.library, "Ground-truth feature CSV")->required();
  eval_cmd->add_option("--queries", ev.queries, "Generated-image feature CSV")->required();
  eval_cmd->add_option("--topk", ev.topk, "k values for top-k accuracy")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--knn", ev.knn, "Neighbors for majority vote")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*separate) return cmd_separate(sep, g, out, err);
    if (*metrics_cmd) return cmd_metrics(met, g, out);
    if (*loss_cmd) return cmd_loss(lo, g, out);
    if (*eval_cmd) return cmd_eval(ev, g, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace stainkit::cli
