// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 6, 8 and 9 drive the installed CLI end to end inside
// --workdir; the rest run against the library.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spnet/checkpoint.hpp"
#include "spnet/dataset.hpp"
#include "spnet/gradcheck.hpp"
#include "spnet/multiview.hpp"
#include "spnet/parallel.hpp"
#include "spnet/pipeline.hpp"
#include "spnet/projection.hpp"
#include "spnet/raycast.hpp"
#include "spnet/render.hpp"
#include "spnet/retrieval.hpp"
#include "spnet/train.hpp"

namespace {

using namespace spnet;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

struct Harness {
  int failures = 0;

  /// time_budget: hard bound from the criterion statement; 0 disables.
  void run(int number, const std::string& name, const std::function<bool(std::string&)>& body,
           double time_budget = 0) {
    std::string detail;
    bool ok = false;
    auto start = std::chrono::steady_clock::now();
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && time_budget > 0 && seconds > time_budget) {
      ok = false;
      detail = "exceeded the " + std::to_string(time_budget) + "s budget";
    }
    std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                seconds, detail.empty() ? "" : " - ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::string cli_path;
fs::path workdir;

int run_cli(const std::string& args) {
  std::string cmd = "\"" + cli_path + "\" " + args + " >> \"" + (workdir / "cli.log").string() +
                    "\" 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TriangleMesh jittered(TriangleMesh mesh, uint64_t seed) {
  Rng rng(seed);
  for (auto& v : mesh.vertices) {
    v.x = v.x * rng.uniform(0.8, 1.2) + rng.uniform(-0.02, 0.02);
    v.y = v.y * rng.uniform(0.8, 1.2) + rng.uniform(-0.02, 0.02);
    v.z = v.z * rng.uniform(0.8, 1.2) + rng.uniform(-0.02, 0.02);
  }
  return normalize(mesh);
}

// ---- criterion bodies ----------------------------------------------------

bool projection_correctness(std::string& detail) {
  const Projection kinds[4] = {Projection::UV, Projection::KavrayskiyVII, Projection::EckertIV,
                               Projection::Cassini};
  for (Projection kind : kinds) {
    for (int i = 0; i < 17; ++i) {
      for (int j = 0; j < 17; ++j) {
        SphereCoord c{2 * kPi * (i + 0.5) / 17 - kPi, kPi * ((j + 0.5) / 17 - 0.5)};
        SphereCoord back = unproject(kind, project(kind, c));
        if (std::fabs(back.lon - c.lon) > 1e-9 || std::fabs(back.lat - c.lat) > 1e-9) {
          detail = std::string("round trip drift on ") + projection_name(kind);
          return false;
        }
      }
    }
  }

  struct Worked {
    double got, expected;
    const char* what;
  } values[4] = {
      {project(Projection::UV, {kPi / 2, 0}).u, 0.75, "uv u"},
      {project(Projection::KavrayskiyVII, {kPi, kPi / 2}).u, 1.36035, "kavrayskiy u"},
      {project(Projection::EckertIV, {0.3, kPi / 2}).v, 1.44720, "eckert v"},
      {project(Projection::Cassini, {0, 0.3}).v, 0.3, "cassini v"},
  };
  for (const auto& w : values) {
    if (std::fabs(w.got - w.expected) > 1e-5) {
      detail = std::string("worked value off: ") + w.what;
      return false;
    }
  }
  return true;
}

bool rendering_oracle(std::string& detail) {
  Rng rng(1001);
  TriangleMesh soup;
  for (int i = 0; i < 500; ++i) {
    for (int k = 0; k < 3; ++k)
      soup.vertices.push_back(
          {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)});
    soup.faces.push_back({3 * i, 3 * i + 1, 3 * i + 2});
  }
  BruteForceCaster brute(soup);
  BvhCaster bvh(soup);
  for (int i = 0; i < 500; ++i) {
    Vec3 d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    double n = norm(d);
    if (n < 1e-3) continue;
    Ray ray{{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)},
            d * (1.0 / n)};
    for (HitRule rule : {HitRule::Farthest, HitRule::Nearest}) {
      auto a = brute.cast(ray, rule);
      auto b = bvh.cast(ray, rule);
      if (a.has_value() != b.has_value() || (a && std::fabs(*a - *b) > 1e-9)) {
        detail = "bvh disagrees with brute force";
        return false;
      }
    }
  }

  TriangleMesh sphere = normalize(make_icosphere(3));
  DepthImage img = render(sphere, Projection::UV, Rotation{});
  for (float p : img.pixels) {
    if (std::fabs(double(p) - 1.0) > 5e-3) {
      detail = "icosphere pixel off unit radius";
      return false;
    }
  }

  TriangleMesh cube = normalize(make_box(4, 4, 4));
  double t = ray_cast(cube, {1, 0, 0});
  if (std::fabs(t - 1.0 / std::sqrt(3.0)) > 1e-6) {
    detail = "cube axis depth " + std::to_string(t);
    return false;
  }
  return true;
}

bool uv_equivariance(std::string& detail) {
  TriangleMesh shapes[3] = {jittered(make_box(1.4, 0.9, 1.1), 11),
                            jittered(make_cylinder(), 12), jittered(make_torus(), 13)};
  for (const auto& mesh : shapes) {
    DepthImage base = render(mesh, Projection::UV, Rotation{});
    DepthImage turned = render(mesh, Projection::UV, Rotation(kPi / 4, 0));
    for (int r = 0; r < 128; ++r) {
      for (int c = 0; c < 128; ++c) {
        double diff = std::fabs(double(turned.at(r, c)) - double(base.at(r, (c + 16) % 128)));
        if (diff > 1e-6) {
          detail = "pixel drift " + std::to_string(diff);
          return false;
        }
      }
    }
  }
  return true;
}

bool gradient_suite(std::string& detail) {
  Rng rng(2001);
  Tensor image({1, 16, 16});
  for (auto& v : image.data) v = rng.uniform();
  SpnetModel model = SpnetModel::init(10, 77, 0.0);
  GradCheckReport report = grad_check(model, image, 4, 1e-4, 200, 78);
  if (!report.passed(1e-4)) {
    detail = "layer max rel err " + std::to_string(report.max_rel_err);
    return false;
  }

  ScoreMatrix scores;
  scores.views = 5;
  scores.classes = 6;
  scores.data.resize(30);
  for (auto& v : scores.data) v = rng.uniform(-1.5, 1.5);
  std::vector<double> weights(5);
  for (auto& w : weights) w = rng.uniform(-0.5, 0.5);
  std::vector<double> analytic = weighted_aggregate_weight_grad(scores, weights, 2);
  for (size_t j = 0; j < weights.size(); ++j) {
    auto loss_at = [&](double wj) {
      std::vector<double> w2 = weights;
      w2[j] = wj;
      return softmax_cross_entropy(aggregate(scores, Aggregation::WeightedAverage, w2), 2).first;
    };
    const double h = 1e-6;
    double numeric = (loss_at(weights[j] + h) - loss_at(weights[j] - h)) / (2 * h);
    double denom = std::max({std::fabs(numeric), std::fabs(analytic[j]), 1e-6});
    if (std::fabs(numeric - analytic[j]) / denom > 1e-4) {
      detail = "ensemble weight gradient off";
      return false;
    }
  }
  return true;
}

bool parameter_budget(std::string& detail) {
  SpnetModel model = SpnetModel::init(10, 1);
  if (model.parameter_count() != 87178) {
    detail = "count " + std::to_string(model.parameter_count());
    return false;
  }
  return true;
}

bool desk_scale_learning(std::string& detail) {
  fs::path run = workdir / "desk";
  fs::create_directories(run);
  // The corpus is small and cleanly separable; train without dropout and
  // keep the ensemble schedule short.
  {
    std::ofstream cfg(run / "run.cfg");
    cfg << "dropout=0\nensemble_epochs=3\n";
  }
  std::string base = "--out \"" + run.string() + "\" --manifest \"" +
                     (run / "manifest.csv").string() + "\" --config \"" +
                     (run / "run.cfg").string() + "\" --seed 42";

  if (run_cli("synth --out \"" + run.string() + "\" --count 400 --classes 5 "
              "--train-fraction 0.75 --seed 42") != 0) {
    detail = "synth failed";
    return false;
  }
  if (run_cli("render " + base + " --views plain") != 0) {
    detail = "plain render failed";
    return false;
  }
  if (run_cli("train " + base + " --epochs 200 --target-accuracy 0.95") != 0) {
    detail = "train failed";
    return false;
  }
  if (run_cli("eval " + base + " --model \"" + (run / "model.spnw").string() +
              "\" --split test") != 0) {
    detail = "eval failed";
    return false;
  }
  double single_view;
  {
    auto metrics = nlohmann::json::parse(slurp(run / "metrics.json"));
    single_view = metrics.at("accuracy").get<double>();
  }
  if (single_view < 0.90) {
    detail = "single-view test accuracy " + std::to_string(single_view);
    return false;
  }

  if (run_cli("render " + base + " --views bank64 --split train") != 0) {
    detail = "bank render failed";
    return false;
  }
  if (run_cli("select " + base + " --topm 5") != 0) {
    detail = "select failed";
    return false;
  }
  if (run_cli("ensemble " + base + " --agg weighted") != 0) {
    detail = "ensemble failed";
    return false;
  }
  if (run_cli("render " + base + " --views selected --split test") != 0) {
    detail = "selected render failed";
    return false;
  }
  if (run_cli("eval " + base + " --model \"" + (run / "ensemble.spnw").string() +
              "\" --split test") != 0) {
    detail = "ensemble eval failed";
    return false;
  }
  double ensemble;
  {
    auto metrics = nlohmann::json::parse(slurp(run / "metrics.json"));
    ensemble = metrics.at("accuracy").get<double>();
  }
  if (ensemble + 1e-12 < single_view) {
    detail = "ensemble " + std::to_string(ensemble) + " < single view " +
             std::to_string(single_view);
    return false;
  }
  detail = "single view " + std::to_string(single_view) + ", ensemble " + std::to_string(ensemble);
  return true;
}

bool ensemble_algebra(std::string& detail) {
  Rng rng(3001);
  for (int trial = 0; trial < 10000; ++trial) {
    ScoreMatrix m;
    m.views = 1 + int(rng.uniform_int(8));
    m.classes = 1 + int(rng.uniform_int(6));
    m.data.resize(size_t(m.views) * m.classes);
    for (auto& v : m.data) v = rng.uniform(-10, 10);

    std::vector<double> uniform(size_t(m.views), 1.0 / double(m.views));
    if (aggregate(m, Aggregation::AvgPool) !=
        aggregate(m, Aggregation::WeightedAverage, uniform)) {
      detail = "uniform weighted average deviates from avg pooling";
      return false;
    }
    std::vector<double> mx = aggregate(m, Aggregation::MaxPool);
    std::vector<double> avg = aggregate(m, Aggregation::AvgPool);
    for (int c = 0; c < m.classes; ++c) {
      if (mx[size_t(c)] < avg[size_t(c)]) {
        detail = "max pooling fell below avg pooling";
        return false;
      }
    }
  }
  return true;
}

bool retrieval_metrics(std::string& detail) {
  // Brute-force oracle comparison on every corpus size up to 50.
  Rng rng(4001);
  for (int n = 1; n <= 50; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> rel(static_cast<size_t>(n));
      for (auto& r : rel) r = rng.uniform() < 0.35 ? 1 : 0;
      int total = 0;
      for (int r : rel) total += r;
      double oracle = 0;
      if (total > 0) {
        for (size_t k = 0; k < rel.size(); ++k) {
          if (!rel[k]) continue;
          int hits = 0;
          for (size_t i = 0; i <= k; ++i) hits += rel[i];
          oracle += double(hits) / double(k + 1);
        }
        oracle /= double(total);
      }
      if (average_precision(rel) != oracle) {
        detail = "incremental AP deviates from the oracle";
        return false;
      }
    }
  }

  if (std::fabs(average_precision({1, 0, 1}) - 0.8333) > 1e-4) {
    detail = "AP worked value";
    return false;
  }
  if (std::fabs(ndcg({0, 1}, 2) - 0.6309) > 1e-4) {
    detail = "NDCG worked value";
    return false;
  }
  FScores f = f_scores({1.0, 0.0, 0.0, 0.0}, {0, 1, 1, 1}, 2);
  if (std::fabs(f.macro - 0.5) > 1e-4 || std::fabs(f.micro - 0.25) > 1e-4) {
    detail = "F-score worked values";
    return false;
  }

  // Block structure of the trained desk-scale descriptors.
  fs::path run = workdir / "desk";
  if (!fs::exists(run / "ensemble.spnw")) {
    detail = "desk-scale artifacts missing (criterion 6 must run first)";
    return false;
  }
  RunConfig config;
  if (pipeline::cmd_retrieve(run / "manifest.csv", config, run) != 0) {
    detail = "retrieve stage failed";
    return false;
  }
  auto metrics = nlohmann::json::parse(slurp(run / "retrieval_metrics.json"));
  double map = metrics.at("mean_ap").get<double>();

  DepthImage sim = read_spdi_file(run / "similarity.spdi");
  Manifest manifest = load_manifest(run / "manifest.csv");
  std::vector<const ManifestRecord*> test;
  for (const auto& rec : manifest.records)
    if (rec.split == "test") test.push_back(&rec);
  if (sim.rows != int(test.size())) {
    detail = "similarity matrix size mismatch";
    return false;
  }
  // Rows are grouped by class, 20 per class; compare mean within-block and
  // off-block distances.
  int n = sim.rows, block = 20;
  double within = 0, between = 0;
  int nw = 0, nb = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (r == c) continue;
      if (r / block == c / block) {
        within += double(sim.at(r, c));
        ++nw;
      } else {
        between += double(sim.at(r, c));
        ++nb;
      }
    }
  }
  within /= nw;
  between /= nb;
  if (!(within < between)) {
    detail = "no block structure: within " + std::to_string(within) + " vs between " +
             std::to_string(between);
    return false;
  }
  detail = "mAP " + std::to_string(map) + ", within/between " + std::to_string(within) + "/" +
           std::to_string(between);
  return true;
}

bool determinism(std::string& detail) {
  for (int run_id = 0; run_id < 2; ++run_id) {
    fs::path run = workdir / ("det" + std::to_string(run_id));
    fs::create_directories(run);
    std::string base = "--out \"" + run.string() + "\" --manifest \"" +
                       (run / "manifest.csv").string() + "\" --seed 7";
    if (run_cli("synth --out \"" + run.string() + "\" --count 24 --classes 3 --seed 7") != 0 ||
        run_cli("render " + base + " --views plain") != 0 ||
        run_cli("render " + base + " --views bank64") != 0 ||
        run_cli("train " + base + " --epochs 3") != 0 ||
        run_cli("select " + base + " --topm 3") != 0 ||
        run_cli("ensemble " + base + " --agg weighted") != 0 ||
        run_cli("eval " + base + " --model \"" + (run / "ensemble.spnw").string() +
                "\" --split test") != 0 ||
        run_cli("retrieve " + base) != 0) {
      detail = "pipeline run " + std::to_string(run_id) + " failed";
      return false;
    }
  }
  for (const char* file : {"model.spnw", "selection.spnw", "ensemble.spnw", "metrics.json",
                           "retrieval_metrics.json", "train_log.csv", "rankings.csv"}) {
    std::string a = slurp(workdir / "det0" / file);
    std::string b = slurp(workdir / "det1" / file);
    if (a.empty() || a != b) {
      detail = std::string("artifact differs between runs: ") + file;
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    if (flag == "--cli") cli_path = argv[i + 1];
    else if (flag == "--workdir") workdir = argv[i + 1];
  }
  if (cli_path.empty() || workdir.empty()) {
    std::cerr << "usage: spnet_acceptance --cli <spnet binary> --workdir <dir>\n";
    return 2;
  }
  fs::create_directories(workdir);

  Harness h;
  h.run(1, "projection correctness", projection_correctness);
  h.run(2, "rendering oracle", rendering_oracle);
  h.run(3, "uv equivariance", uv_equivariance);
  h.run(4, "gradient suite", gradient_suite);
  h.run(5, "parameter budget", parameter_budget);
  h.run(6, "desk-scale learning", desk_scale_learning);
  h.run(7, "ensemble algebra", ensemble_algebra);
  h.run(8, "retrieval metrics", retrieval_metrics);
  h.run(9, "determinism", determinism);

  if (h.failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", h.failures);
  return 1;
}
