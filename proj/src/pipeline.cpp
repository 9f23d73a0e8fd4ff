#include "spnet/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "spnet/binio.hpp"
#include "spnet/checkpoint.hpp"
#include "spnet/gradcheck.hpp"
#include "spnet/parallel.hpp"

namespace spnet::pipeline {

namespace {

namespace fs = std::filesystem;

std::string view_file(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "view%02d.spdi", index);
  return buf;
}

fs::path image_dir(const fs::path& out_dir, const std::string& preset,
                   const std::string& object_id) {
  return out_dir / "images" / preset / object_id;
}

std::vector<const ManifestRecord*> split_records(const Manifest& manifest,
                                                 const std::string& split) {
  std::vector<const ManifestRecord*> out;
  for (const auto& rec : manifest.records)
    if (split == "all" || rec.split == split) out.push_back(&rec);
  return out;
}

Manifest require_manifest(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path))
    throw StageDependency("manifest " + manifest_path.string() +
                          " not found; run synth or point --manifest at a dataset");
  return load_manifest(manifest_path);
}

Checkpoint require_checkpoint(const fs::path& path, const char* produced_by) {
  if (!fs::exists(path))
    throw StageDependency("checkpoint " + path.string() + " not found; run " + produced_by +
                          " first");
  return load_checkpoint(path);
}

DepthImage require_view(const fs::path& out_dir, const std::string& preset,
                        const std::string& object_id, int view_index) {
  fs::path p = image_dir(out_dir, preset, object_id) / view_file(view_index);
  if (!fs::exists(p))
    throw StageDependency("missing rendered view " + p.string() + "; run render --views " +
                          preset + " first");
  DepthImage img = read_spdi_file(p);
  img.source_id = object_id;
  return img;
}

/// Loads the canonical single view of every record in the split.
std::vector<LabeledImage> load_plain_split(const Manifest& manifest,
                                           const std::vector<std::string>& classes,
                                           const fs::path& out_dir, const std::string& split) {
  std::vector<LabeledImage> data;
  for (const auto* rec : split_records(manifest, split)) {
    DepthImage img = require_view(out_dir, "plain", rec->object_id, 0);
    LabeledImage li = to_labeled(img, class_index(classes, rec->class_label));
    li.id = rec->object_id;
    data.push_back(std::move(li));
  }
  return data;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> ensemble_weights_or_uniform(const Checkpoint& ckpt) {
  if (!ckpt.ensemble_weights.empty()) return ckpt.ensemble_weights;
  size_t m = ckpt.bank ? ckpt.bank->selected.size() : 1;
  return std::vector<double>(m, 1.0 / double(m));
}

}  // namespace

int cmd_render(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir,
               const std::string& split) {
  Manifest manifest = require_manifest(manifest_path);
  ViewPreset preset = preset_from_name(config.view_preset);

  std::optional<ViewBank> bank;
  std::vector<Rotation> rotations;
  std::vector<int> view_indices;  // file index per rotation
  std::string archive;            // directory name under images/

  if (preset == ViewPreset::Selected) {
    Checkpoint ckpt = require_checkpoint(out_dir / "selection.spnw", "select");
    if (!ckpt.bank) throw StageDependency("selection.spnw carries no view bank; rerun select");
    bank = ckpt.bank;
    rotations = preset_rotations(preset, &*bank);
    view_indices = bank->selected;
    archive = preset_name(ViewPreset::Bank64);  // subset of the bank archive
  } else {
    rotations = preset_rotations(preset);
    view_indices.resize(rotations.size());
    for (size_t i = 0; i < rotations.size(); ++i) view_indices[i] = int(i);
    archive = preset_name(preset);
  }

  auto records = split_records(manifest, split);
  std::vector<std::string> errors(records.size());

  parallel_for(
      records.size(),
      [&](size_t i) {
        const ManifestRecord& rec = *records[i];
        fs::path dir = image_dir(out_dir, archive, rec.object_id);
        fs::create_directories(dir);

        // Resumable: skip objects whose files all exist.
        bool complete = true;
        for (int idx : view_indices)
          if (!fs::exists(dir / view_file(idx))) {
            complete = false;
            break;
          }
        if (complete) return;

        try {
          TriangleMesh mesh = normalize(load_mesh(manifest.resolve(rec)), config.center_mode);
          mesh.id = rec.object_id;
          Renderer renderer(mesh, config.hit_rule);
          for (size_t j = 0; j < rotations.size(); ++j) {
            fs::path file = dir / view_file(view_indices[j]);
            if (fs::exists(file)) continue;
            DepthImage img = renderer.render(config.projection, rotations[j], config.image_size);
            write_spdi_file(file, img);
          }
        } catch (const Error& e) {
          errors[i] = rec.object_id + ": " + e.what();
        }
      },
      config.workers);

  int failed = 0;
  for (const auto& e : errors)
    if (!e.empty()) {
      std::cerr << "render error: " << e << "\n";
      ++failed;
    }
  std::cout << "rendered " << (records.size() - size_t(failed)) << "/" << records.size()
            << " objects (" << archive << ", " << projection_name(config.projection) << ")\n";
  return failed == 0 ? 0 : 1;
}

int cmd_train(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
  Manifest manifest = require_manifest(manifest_path);
  std::vector<std::string> classes = class_names(manifest);
  std::vector<LabeledImage> train = load_plain_split(manifest, classes, out_dir, "train");
  std::vector<LabeledImage> test = load_plain_split(manifest, classes, out_dir, "test");
  if (train.empty()) throw StageDependency("train split is empty");

  std::ofstream log(out_dir / "train_log.csv");
  log << "epoch,split,loss,accuracy\n";
  TrainConfig tc = config.train;
  tc.workers = config.workers;
  SpnetModel model = train_backbone(train, test.empty() ? nullptr : &test, int(classes.size()), tc,
                                    [&](int epoch, const std::string& split, double loss,
                                        double acc) {
                                      log << epoch << ',' << split << ',' << format_double(loss)
                                          << ',' << format_double(acc) << '\n';
                                    });

  Checkpoint ckpt;
  ckpt.model = std::move(model);
  save_checkpoint(out_dir / "model.spnw", ckpt);
  std::cout << "trained backbone on " << train.size() << " objects, " << classes.size()
            << " classes -> " << (out_dir / "model.spnw").string() << "\n";
  return 0;
}

int cmd_select(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
  Manifest manifest = require_manifest(manifest_path);
  std::vector<std::string> classes = class_names(manifest);
  Checkpoint ckpt = require_checkpoint(out_dir / "model.spnw", "train");

  auto records = split_records(manifest, "train");
  if (records.empty()) throw StageDependency("train split is empty");
  std::vector<Rotation> rotations = preset_rotations(ViewPreset::Bank64);

  std::vector<int> labels(records.size());
  for (size_t i = 0; i < records.size(); ++i)
    labels[i] = class_index(classes, records[i]->class_label);

  SelectionConfig sc;
  sc.learning_rate = config.train.learning_rate;
  sc.epochs = config.selection_epochs;
  sc.batch_size = config.train.batch_size;
  sc.seed = config.train.seed;

  auto views_of = [&](int i) {
    std::vector<DepthImage> views;
    views.reserve(rotations.size());
    for (size_t j = 0; j < rotations.size(); ++j)
      views.push_back(require_view(out_dir, "bank64", records[size_t(i)]->object_id, int(j)));
    return views;
  };

  ViewBank bank = train_view_selection(ckpt.model, views_of, labels, int(records.size()),
                                       rotations, config.top_m, sc, config.workers);

  std::ofstream weights_csv(out_dir / "selection_weights.csv");
  weights_csv << "view,weight,selected\n";
  for (size_t j = 0; j < bank.weights.size(); ++j) {
    bool sel = std::find(bank.selected.begin(), bank.selected.end(), int(j)) != bank.selected.end();
    weights_csv << j << ',' << format_double(bank.weights[j]) << ',' << (sel ? 1 : 0) << '\n';
  }

  Checkpoint out;
  out.model = std::move(ckpt.model);
  out.bank = std::move(bank);
  out.aggregation = config.aggregation;
  save_checkpoint(out_dir / "selection.spnw", out);
  std::cout << "selected " << config.top_m << " of " << rotations.size() << " views -> "
            << (out_dir / "selection.spnw").string() << "\n";
  return 0;
}

int cmd_ensemble(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
  Manifest manifest = require_manifest(manifest_path);
  std::vector<std::string> classes = class_names(manifest);
  Checkpoint ckpt = require_checkpoint(out_dir / "selection.spnw", "select");
  if (!ckpt.bank) throw StageDependency("selection.spnw carries no view bank; rerun select");

  auto records = split_records(manifest, "train");
  std::vector<int> labels(records.size());
  for (size_t i = 0; i < records.size(); ++i)
    labels[i] = class_index(classes, records[i]->class_label);

  const ViewBank& bank = *ckpt.bank;
  auto selected_views_of = [&](int i) {
    std::vector<DepthImage> views;
    views.reserve(bank.selected.size());
    for (int idx : bank.selected)
      views.push_back(require_view(out_dir, "bank64", records[size_t(i)]->object_id, idx));
    return views;
  };

  EnsembleTrainConfig ec;
  ec.learning_rate = config.train.learning_rate;
  ec.epochs = config.ensemble_epochs;
  ec.batch_size = std::max(1, config.train.batch_size / 2);
  ec.seed = config.train.seed;
  ec.from_scratch = config.ensemble_from_scratch;
  ec.dropout_rate = config.train.dropout_rate;
  ec.workers = config.workers;

  std::ofstream log(out_dir / "ensemble_log.csv");
  log << "epoch,split,loss,accuracy\n";
  EnsembleModel model = train_ensemble(ckpt.model, bank, selected_views_of, labels,
                                       int(records.size()), config.aggregation, ec,
                                       [&](int epoch, double loss, double acc) {
                                         log << epoch << ",train," << format_double(loss) << ','
                                             << format_double(acc) << '\n';
                                       });

  Checkpoint out;
  out.model = std::move(model.backbone);
  out.bank = bank;
  out.aggregation = model.aggregation;
  out.ensemble_weights = model.view_weights;
  save_checkpoint(out_dir / "ensemble.spnw", out);
  std::cout << "ensembled " << bank.selected.size() << " views ("
            << aggregation_name(model.aggregation) << ") -> "
            << (out_dir / "ensemble.spnw").string() << "\n";
  return 0;
}

int cmd_eval(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir,
             const fs::path& model_path, const std::string& split) {
  Manifest manifest = require_manifest(manifest_path);
  std::vector<std::string> classes = class_names(manifest);
  Checkpoint ckpt = require_checkpoint(model_path, "train");

  auto records = split_records(manifest, split);
  if (records.empty()) throw StageDependency("split '" + split + "' is empty");

  double loss_sum = 0;
  int correct = 0;
  bool ensemble = ckpt.bank && !ckpt.bank->selected.empty() && !ckpt.ensemble_weights.empty();

  if (ensemble) {
    EnsembleModel model;
    model.backbone = ckpt.model;
    model.rotations = ckpt.bank->rotations;
    model.view_indices = ckpt.bank->selected;
    model.view_weights = ensemble_weights_or_uniform(ckpt);
    model.aggregation = ckpt.aggregation;
    for (const auto* rec : records) {
      std::vector<DepthImage> views;
      for (int idx : ckpt.bank->selected)
        views.push_back(require_view(out_dir, "bank64", rec->object_id, idx));
      std::vector<double> agg = ensemble_scores(model, views, config.workers);
      auto [loss, grad] = softmax_cross_entropy(agg, class_index(classes, rec->class_label));
      (void)grad;
      loss_sum += loss;
      int pred = int(std::max_element(agg.begin(), agg.end()) - agg.begin());
      correct += pred == class_index(classes, rec->class_label) ? 1 : 0;
    }
  } else {
    std::vector<LabeledImage> data = load_plain_split(manifest, classes, out_dir, split);
    EvalResult r = evaluate(ckpt.model, data, config.workers);
    loss_sum = r.loss * double(data.size());
    correct = int(std::lround(r.accuracy * double(data.size())));
  }

  nlohmann::json j;
  j["accuracy"] = double(correct) / double(records.size());
  j["count"] = records.size();
  j["loss"] = loss_sum / double(records.size());
  j["model"] = ensemble ? "ensemble" : "single_view";
  j["split"] = split;
  write_json(out_dir / "metrics.json", j);
  std::cout << "eval " << split << ": accuracy " << double(correct) / double(records.size())
            << " over " << records.size() << " objects\n";
  return 0;
}

int cmd_retrieve(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
  Manifest manifest = require_manifest(manifest_path);
  std::vector<std::string> classes = class_names(manifest);
  Checkpoint ckpt = require_checkpoint(out_dir / "ensemble.spnw", "ensemble");
  if (!ckpt.bank) throw StageDependency("ensemble.spnw carries no view bank; rerun ensemble");

  EnsembleModel model;
  model.backbone = ckpt.model;
  model.rotations = ckpt.bank->rotations;
  model.view_indices = ckpt.bank->selected;
  model.view_weights = ensemble_weights_or_uniform(ckpt);
  model.aggregation = ckpt.aggregation;

  auto records = split_records(manifest, "test");
  if (records.empty()) throw StageDependency("test split is empty");

  std::vector<Descriptor> corpus(records.size());
  parallel_for(
      records.size(),
      [&](size_t i) {
        std::vector<DepthImage> views;
        for (int idx : ckpt.bank->selected)
          views.push_back(require_view(out_dir, "bank64", records[i]->object_id, idx));
        std::vector<double> agg = ensemble_scores(model, views, 1);
        corpus[i] = make_descriptor(records[i]->object_id, agg,
                                    class_index(classes, records[i]->class_label));
      },
      config.workers);

  RetrievalResult result = evaluate_retrieval(corpus, config.metric);

  std::ofstream csv(out_dir / "rankings.csv");
  csv << "query_id,rank,target_id,distance\n";
  for (const RankedList& list : result.rankings)
    for (size_t k = 0; k < list.indices.size(); ++k)
      csv << list.query_id << ',' << (k + 1) << ',' << corpus[size_t(list.indices[k])].object_id
          << ',' << format_double(list.distances[k]) << '\n';

  nlohmann::json j;
  j["accuracy"] = result.metrics.accuracy;
  j["macro_f"] = result.metrics.macro_f;
  j["mean_ap"] = result.metrics.mean_ap;
  j["mean_ndcg"] = result.metrics.mean_ndcg;
  j["metric"] = metric_name(config.metric);
  j["micro_f"] = result.metrics.micro_f;
  j["queries"] = corpus.size();
  write_json(out_dir / "retrieval_metrics.json", j);

  write_spdi_file(out_dir / "similarity.spdi",
                  similarity_image(similarity_matrix(corpus, config.metric)));

  std::cout << "retrieval over " << corpus.size() << " queries: mAP "
            << result.metrics.mean_ap << ", NDCG " << result.metrics.mean_ndcg << "\n";
  return 0;
}

int cmd_synth(const fs::path& out_dir, const SynthConfig& config) {
  fs::create_directories(out_dir);
  Manifest manifest = synthesize_dataset(out_dir, config);
  std::cout << "synthesized " << manifest.records.size() << " objects in " << config.classes
            << " classes -> " << (out_dir / "manifest.csv").string() << "\n";
  return 0;
}

int cmd_gradcheck(double tolerance, uint64_t seed) {
  Rng rng(seed);
  Tensor image({1, 16, 16});
  for (auto& v : image.data) v = rng.uniform();
  SpnetModel model = SpnetModel::init(10, seed, 0.0);
  GradCheckReport report = grad_check(model, image, 3, 1e-4, 200, seed);

  std::cout << "parameter        checked  max_rel_err\n";
  for (const auto& e : report.entries) {
    std::printf("%-16s %7d  %.3e\n", e.param.c_str(), e.checked, e.max_rel_err);
  }

  // Ensemble view-weight gradient against central differences.
  ScoreMatrix scores;
  scores.views = 5;
  scores.classes = 4;
  scores.data.resize(size_t(scores.views) * scores.classes);
  for (auto& v : scores.data) v = rng.uniform(-1.0, 1.0);
  std::vector<double> weights(static_cast<size_t>(scores.views));
  for (auto& w : weights) w = rng.uniform(-0.5, 0.5);
  int label = 2;

  std::vector<double> analytic = weighted_aggregate_weight_grad(scores, weights, label);
  double max_err = 0;
  const double h = 1e-6;
  for (size_t j = 0; j < weights.size(); ++j) {
    auto loss_with = [&](double wj) {
      std::vector<double> w2 = weights;
      w2[j] = wj;
      std::vector<double> agg = aggregate(scores, Aggregation::WeightedAverage, w2);
      return softmax_cross_entropy(agg, label).first;
    };
    double numeric = (loss_with(weights[j] + h) - loss_with(weights[j] - h)) / (2.0 * h);
    double denom = std::max({std::fabs(analytic[j]), std::fabs(numeric), 1e-6});
    max_err = std::max(max_err, std::fabs(analytic[j] - numeric) / denom);
  }
  std::printf("%-16s %7zu  %.3e\n", "view_weights", weights.size(), max_err);

  double overall = std::max(report.max_rel_err, max_err);
  std::cout << (overall < tolerance ? "PASS" : "FAIL") << " (max " << overall << ", tol "
            << tolerance << ")\n";
  return overall < tolerance ? 0 : 1;
}

}  // namespace spnet::pipeline
