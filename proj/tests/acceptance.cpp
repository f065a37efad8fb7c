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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Usage: stainkit_acceptance <path-to-stainkit-cli>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "stainkit/stainkit.hpp"

namespace {

using namespace stainkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

std::vector<RgbImage> random_corpus(std::size_t n, std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RgbImage> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_image(rng, side, side));
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome stain_roundtrip() {
  const auto corpus = random_corpus(100, 64, 101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& img : corpus) {
    const RgbImage all = isolate_channel(img, ChannelSelector::all());
    worst = std::max(worst, max_abs_diff(all.data(), clamp_for_od(img).data()));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 2.0, fmt("max |diff| %.3g, %.3f s", worst, secs)};
}

Outcome multiplicative_decomposition() {
  const auto corpus = random_corpus(100, 64, 101);
  double worst = 0.0;
  for (const auto& img : corpus) {
    const auto h = isolate_channel_unclipped(img, ChannelSelector::only(Stain::kHematoxylin));
    const auto e = isolate_channel_unclipped(img, ChannelSelector::only(Stain::kEosin));
    const auto d = isolate_channel_unclipped(img, ChannelSelector::only(Stain::kDab));
    const RgbImage ref = clamp_for_od(img);
    for (std::size_t i = 0; i < img.size(); ++i)
      worst = std::max(worst, std::abs(h.data()[i] * e.data()[i] * d.data()[i] - ref.data()[i]));
  }
  return {worst <= 1e-5, fmt("max |diff| %.3g", worst)};
}

Outcome projection_idempotence() {
  double matrix_worst = 0.0, image_worst = 0.0;
  const auto corpus = random_corpus(20, 32, 103);
  for (Stain s : {Stain::kHematoxylin, Stain::kEosin, Stain::kDab}) {
    const auto sel = ChannelSelector::only(s);
    const Matrix3 m = projection_matrix(StainBasis::standard(), sel);
    matrix_worst = std::max(matrix_worst, (m * m - m).cwiseAbs().maxCoeff());
    for (const auto& img : corpus) {
      const RgbImage once = isolate_channel(img, sel);
      image_worst = std::max(image_worst, max_abs_diff(isolate_channel(once, sel).data(), once.data()));
    }
  }
  return {matrix_worst <= 1e-12 && image_worst <= 1e-6,
          fmt("matrix %.3g, image %.3g", matrix_worst, image_worst)};
}

Outcome inverse_oracle() {
  const Matrix3& p = StainBasis::default_matrix();
  const Matrix3 inv = pseudo_inverse(p);
  const double identity_dev = (inv * p - Matrix3::Identity()).cwiseAbs().maxCoeff();
  const auto gj = oracle::gauss_jordan_inverse(oracle::kReferenceBasis);
  double oracle_dev = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) oracle_dev = std::max(oracle_dev, std::abs(inv(r, c) - gj[r][c]));
  bool basis_matches = true;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) basis_matches &= p(r, c) == oracle::kReferenceBasis[r][c];
  return {basis_matches && identity_dev <= 1e-12 && oracle_dev <= 1e-12,
          fmt("|P+P - I| %.3g, vs Gauss-Jordan %.3g", identity_dev, oracle_dev)};
}

Outcome metric_closed_forms() {
  std::mt19937_64 rng(105);
  const RgbImage x = oracle::random_image(rng, 32, 32);
  const double self = metrics::ssim(x, x);
  const double constant = metrics::ssim(RgbImage::filled(32, 32, 0.5), RgbImage::filled(32, 32, 0.6));

  const RgbImage base = oracle::random_image(rng, 32, 32, 0.0, 0.9);
  std::vector<double> shifted(base.data().begin(), base.data().end());
  for (double& v : shifted) v += 0.1;
  const double psnr = metrics::psnr(base, RgbImage(32, 32, shifted));

  double naive_worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const RgbImage a = oracle::random_image(rng, 32, 32);
    const RgbImage b = oracle::random_image(rng, 32, 32);
    naive_worst = std::max(naive_worst, std::abs(metrics::ssim(a, b) - oracle::naive_ssim(a, b, {})));
  }
  const bool ok = std::abs(self - 1.0) <= 1e-9 && std::abs(constant - 0.983609) <= 1e-6 &&
                  std::abs(psnr - 20.0) <= 1e-9 && naive_worst <= 1e-7;
  std::ostringstream d;
  d.precision(9);
  d << "ssim(x,x) " << self << ", constant pair " << constant << ", psnr " << psnr << " dB, naive dev "
    << naive_worst;
  return {ok, d.str()};
}

Outcome gradient_suite() {
  std::mt19937_64 rng(106);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto t0 = Clock::now();
  double cos_worst = 0.0, l1_worst = 0.0, focal_worst = 0.0;

  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + t % 15;
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    const auto r = loss::cosine_similarity(a, b);
    const auto fa = oracle::central_difference([&](auto x) { return oracle::cosine_loss_value(x, b); }, a);
    const auto fb = oracle::central_difference([&](auto x) { return oracle::cosine_loss_value(a, x); }, b);
    cos_worst = std::max({cos_worst, oracle::relative_error(r.grad_a, fa), oracle::relative_error(r.grad_b, fb)});
  }
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + t % 32;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      do b[i] = u(rng);
      while (std::abs(a[i] - b[i]) < 1e-3);  // stay off the kink
    }
    const auto r = loss::l1(a, b);
    const auto fa = oracle::central_difference([&](auto x) { return oracle::mean_abs_diff(x, b); }, a);
    const auto fb = oracle::central_difference([&](auto x) { return oracle::mean_abs_diff(a, x); }, b);
    l1_worst = std::max({l1_worst, oracle::relative_error(r.grad_a, fa), oracle::relative_error(r.grad_b, fb)});
  }
  for (int t = 0; t < 1000; ++t) {
    std::array<double, 4> p{};
    double s = 0.0;
    for (auto& v : p) s += (v = 0.02 + u(rng));
    for (auto& v : p) v /= s;
    const std::size_t target = t % 4;
    const double alpha = 0.1 + u(rng), gamma = 4.0 * u(rng);
    const auto r = loss::focal(p, target, alpha, gamma);
    const double h = oracle::kFdStep;
    const double fd = (oracle::focal_value(p[target] + h, alpha, gamma) -
                       oracle::focal_value(p[target] - h, alpha, gamma)) / (2.0 * h);
    std::array<double, 4> numeric{};
    numeric[target] = fd;
    focal_worst = std::max(focal_worst, oracle::relative_error(r.grad_probs, numeric));
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d.precision(3);
  d << "cosine " << cos_worst << ", l1 " << l1_worst << ", focal " << focal_worst << ", " << secs << " s";
  return {std::max({cos_worst, l1_worst, focal_worst}) <= 1e-5 && secs < 5.0, d.str()};
}

Outcome loss_hierarchy() {
  const double total = loss::overall(1, 1, 1, 1, 1, 1, 1).total;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double ce_worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::array<double, 4> p{};
    double s = 0.0;
    for (auto& v : p) s += (v = u(rng));
    for (auto& v : p) v /= s;
    const std::size_t target = t % 4;
    ce_worst = std::max(ce_worst, std::abs(loss::focal(p, target, 1.0, 0.0).value + std::log(p[target])));
  }
  return {std::abs(total - 179.0) <= 1e-9 && ce_worst <= 1e-12,
          fmt("total %.12g, focal vs CE %.3g", total, ce_worst)};
}

Tensor4 identity_kernel(std::size_t c, std::size_t k) {
  std::vector<double> w(c * c * k * k, 0.0);
  for (std::size_t i = 0; i < c; ++i) w[((i * c + i) * k + k / 2) * k + k / 2] = 1.0;
  return Tensor4({c, c, k, k}, std::move(w));
}

Outcome modconv() {
  std::mt19937_64 rng(108);
  std::normal_distribution<double> g(0.0, 1.0);
  double conv_worst = 0.0, norm_worst = 0.0, id_worst = 0.0;
  std::size_t instances = 0, eps_dominated = 0;
  for (std::size_t n = 1; n <= 2; ++n)
    for (std::size_t c = 1; c <= 4; ++c)
      for (std::size_t h = 1; h <= 8; ++h)
        for (std::size_t w = 1; w <= 8; ++w) {
          const std::size_t k = std::min(h, w) >= 3 ? 3 : 1;
          const std::size_t out = 1 + (h + w + c) % 4;
          const Tensor4 x = oracle::random_tensor(rng, {n, c, h, w});
          const Tensor4 weight = oracle::random_tensor(rng, {out, c, k, k});
          std::vector<double> style(c), bias(out);
          for (auto& s : style) s = g(rng);
          for (auto& b : bias) b = g(rng);
          const ModConvParams p{{weight, bias}, style};
          const Tensor4 y = nn::mod_conv2d(x, p);
          const Tensor4 ref = oracle::naive_mod_conv(x, weight, bias, style, kDemodEpsilon);
          conv_worst = std::max(conv_worst, max_abs_diff(y.data(), ref.data()));

          const Tensor4 dw = nn::demodulate_weights(p);
          const std::size_t per_out = c * k * k;
          for (std::size_t o = 0; o < out; ++o) {
            // The norm is sqrt(S / (S + eps)) for modulated energy S, so only
            // channels with S well above eps can meet the 1e-6 bound.
            double energy = 0.0;
            for (std::size_t i = 0; i < per_out; ++i) {
              const double m = weight.data()[o * per_out + i] * (style[i / (k * k)] + 1.0);
              energy += m * m;
            }
            if (energy < 1e-2) {
              ++eps_dominated;
              continue;
            }
            double sq = 0.0;
            for (std::size_t i = 0; i < per_out; ++i) sq += dw.data()[o * per_out + i] * dw.data()[o * per_out + i];
            norm_worst = std::max(norm_worst, std::abs(std::sqrt(sq) - 1.0));
          }

          const ModConvParams ident{{identity_kernel(c, k), std::nullopt}, std::vector<double>(c, 0.0)};
          id_worst = std::max(id_worst, max_abs_diff(nn::mod_conv2d(x, ident).data(), x.data()));
          ++instances;
        }
  std::ostringstream d;
  d.precision(3);
  d << instances << " shapes; vs naive " << conv_worst << ", norm dev " << norm_worst << " (" << eps_dominated
    << " channels below energy 1e-2 skipped)" << ", identity " << id_worst;
  return {conv_worst <= 1e-10 && norm_worst <= 1e-6 && id_worst <= 1e-7, d.str()};
}

Outcome simam() {
  const double s05 = oracle::sigmoid(0.5);
  double constant_worst = 0.0;
  for (double v : {-3.0, 0.0, 0.25, 7.0}) {
    const Tensor4 x({1, 2, 5, 4}, std::vector<double>(40, v));
    const Tensor4 gates = nn::simam_gate(x);
    for (double gate : gates.data()) constant_worst = std::max(constant_worst, std::abs(gate - s05));
  }
  std::mt19937_64 rng(109);
  bool in_range = true, signs = true;
  for (int t = 0; t < 100; ++t) {
    const Tensor4 x = oracle::random_tensor(rng, {1 + t % 2u, 1 + t % 4u, 2 + t % 7u, 2 + t % 5u}, 3.0);
    const Tensor4 gate = nn::simam_gate(x);
    const Tensor4 y = nn::simam(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      in_range &= gate.data()[i] > 0.62245 && gate.data()[i] <= 1.0;
      const double a = x.data()[i], b = y.data()[i];
      signs &= (a > 0 && b > 0) || (a < 0 && b < 0) || (a == 0 && b == 0);
    }
  }
  return {constant_worst <= 1e-9 && in_range && signs,
          fmt("constant gate dev %.3g; range ", constant_worst) + (in_range ? "ok" : "violated") +
              "; signs " + (signs ? "preserved" : "flipped")};
}

Outcome eval_harness() {
  const auto recs = her2::load_feature_records(oracle::fixture("library_200.csv"));
  const auto queries = her2::load_feature_records(oracle::fixture("queries_200.csv"));
  const std::vector<std::size_t> ks{1, 3, 5};
  const FeatureLibrary lib(recs);
  const auto acc = her2::topk_accuracy(lib, queries, ks);
  const double knn = her2::knn_accuracy(lib, queries, 10);
  const auto counts = oracle::brute_force_eval(recs, queries, ks, 10);
  const double n = static_cast<double>(queries.size());
  bool exact = knn == counts.knn_hits / n;
  for (std::size_t i = 0; i < ks.size(); ++i) exact &= acc.at(ks[i]) == counts.topk_hits[i] / n;

  bool self = her2::knn_accuracy(lib, recs, 1) == 1.0;
  for (const auto& [k, v] : her2::topk_accuracy(lib, recs, ks)) self &= v == 1.0;

  std::mt19937_64 rng(110);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, 3);
  bool monotone = true;
  const std::vector<std::size_t> all_k{1, 2, 3, 4, 5, 7, 10, 15, 25};
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 3 + t % 6;
    const auto make = [&](std::size_t count, const std::string& prefix) {
      std::vector<FeatureRecord> out(count);
      for (std::size_t i = 0; i < count; ++i) {
        out[i] = {prefix + std::to_string(i), label(rng), std::vector<double>(d)};
        for (auto& v : out[i].vector) v = g(rng);
      }
      return out;
    };
    const FeatureLibrary rl(make(25, "l"));
    const auto rq = make(12, "q");
    const auto a = her2::topk_accuracy(rl, rq, all_k);
    for (std::size_t i = 1; i < all_k.size(); ++i) monotone &= a.at(all_k[i - 1]) <= a.at(all_k[i]);
  }
  std::ostringstream dt;
  dt << "top1 " << acc.at(1) << " top3 " << acc.at(3) << " top5 " << acc.at(5) << " knn10 " << knn
     << "; brute force " << (exact ? "equal" : "differs") << "; self " << (self ? "1.0" : "<1")
     << "; monotone " << (monotone ? "yes" : "no");
  return {exact && self && monotone, dt.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

struct Run {
  int status;
  std::string stdout_text;
};

Run run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = quote(cli) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) text.append(buf, got);
  return {::pclose(pipe), text};
}

Outcome cli_determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found: " + cli};
  const fs::path dir = fs::temp_directory_path() / "stainkit_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto fx = [](const std::string& name) { return quote(oracle::fixture(name)); };
  {
    std::ofstream(dir / "same.csv") << "0.5,1.5,-2\n0.5,1.5,-2\n";
  }

  const std::vector<std::pair<std::string, std::string>> jobs = {
      {"separate", "--json --out " + quote((dir / "sep_@.png").string()) + " separate --in " + fx("he_tile.png") +
                       " --channel HE"},
      {"metrics", "metrics --pred " + fx("ihc_generated.png") + " --gt " + fx("ihc_tile.png")},
      {"metrics-file", "--out " + quote((dir / "met_@.json").string()) + " metrics --pred " + fx("const_050.png") +
                           " --gt " + fx("const_060.png")},
      {"loss", "loss --pred " + fx("ihc_generated.png") + " --gt " + fx("ihc_tile.png") + " --cmp-features " +
                   fx("features_pair.csv") + " --h-features " + quote((dir / "same.csv").string()) +
                   " --probs 0.1,0.2,0.3,0.4 --target 3 --gan-512 0.2 --gan-256 0.4"},
      {"eval", "eval --library " + fx("library_200.csv") + " --queries " + fx("queries_200.csv")},
  };

  std::string detail;
  bool ok = true;
  for (const auto& [name, args] : jobs) {
    std::array<std::string, 2> outputs, files;
    bool exits_ok = true;
    for (int rep = 0; rep < 2; ++rep) {
      std::string a = args;
      const auto at = a.find('@');
      std::string file;
      if (at != std::string::npos) {
        a.replace(at, 1, std::to_string(rep));
        file = (dir / (name == "separate" ? "sep_" : "met_")).string() + std::to_string(rep) +
               (name == "separate" ? ".png" : ".json");
      }
      const Run r = run_cli(cli, a);
      exits_ok &= r.status == 0;
      outputs[rep] = r.stdout_text;
      if (!file.empty()) files[rep] = slurp(file);
    }
    // The separate report embeds the output path, which differs between reps.
    if (name == "separate") {
      for (int rep = 0; rep < 2; ++rep) {
        const auto pos = outputs[rep].find("sep_" + std::to_string(rep));
        if (pos != std::string::npos) outputs[rep].replace(pos, 5, "sep_#");
      }
    }
    const bool same = exits_ok && outputs[0] == outputs[1] && files[0] == files[1] &&
                      !(outputs[0].empty() && files[0].empty());
    ok &= same;
    detail += name + (same ? " ok" : " MISMATCH") + "; ";
  }
  fs::remove_all(dir);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"stain roundtrip", stain_roundtrip},
      {"multiplicative decomposition", multiplicative_decomposition},
      {"projection idempotence", projection_idempotence},
      {"inverse oracle", inverse_oracle},
      {"metric closed forms", metric_closed_forms},
      {"gradient suite", gradient_suite},
      {"loss hierarchy", loss_hierarchy},
      {"modulated convolution", modconv},
      {"simam", simam},
      {"evaluation harness", eval_harness},
      {"cli determinism", [&] { return cli_determinism(cli); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
