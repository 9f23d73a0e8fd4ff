#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spnet/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string manifest;
  std::string config_file;
  std::string out_dir = "out";
  std::string projection;
  std::string views;
  std::string agg;
  std::string metric;
  int top_m = -1;
  int workers = -1;
  long long seed = -1;
  int epochs = -1;
  double learning_rate = -1;
  int batch_size = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_manifest = true) {
  if (needs_manifest)
    cmd->add_option("--manifest", args.manifest, "Dataset manifest CSV")->required();
  cmd->add_option("--config", args.config_file, "key=value config file");
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Deterministic seed");
  cmd->add_option("--projection", args.projection,
                  "uv | kavrayskiy7 | eckert4 | cassini | depthmap_yz | panorama_z");
  cmd->add_option("--views", args.views, "plain | major_axes | mvcnn12 | bank64 | selected");
  cmd->add_option("--topm", args.top_m, "Views kept by selection");
  cmd->add_option("--agg", args.agg, "max | avg | weighted");
  cmd->add_option("--metric", args.metric, "l1 | l2");
  cmd->add_option("--workers", args.workers, "Worker threads (SPNET_THREADS also applies)");
  cmd->add_option("--epochs", args.epochs, "Training epochs");
  cmd->add_option("--lr", args.learning_rate, "SGD learning rate");
  cmd->add_option("--batch", args.batch_size, "Batch size");
}

spnet::RunConfig build_config(const CommonArgs& args) {
  spnet::RunConfig config;
  if (!args.config_file.empty()) config = spnet::load_config(args.config_file);
  // Flags override the config file.
  if (!args.projection.empty()) spnet::apply_setting(config, "projection", args.projection);
  if (!args.views.empty()) spnet::apply_setting(config, "views", args.views);
  if (!args.agg.empty()) spnet::apply_setting(config, "aggregation", args.agg);
  if (!args.metric.empty()) spnet::apply_setting(config, "metric", args.metric);
  if (args.top_m >= 0) config.top_m = args.top_m;
  if (args.workers >= 0) {
    config.workers = args.workers;
    config.train.workers = args.workers;
  }
  if (args.seed >= 0) config.train.seed = uint64_t(args.seed);
  if (args.epochs >= 0) config.train.epochs = args.epochs;
  if (args.learning_rate >= 0) config.train.learning_rate = args.learning_rate;
  if (args.batch_size > 0) config.train.batch_size = args.batch_size;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereographic-projection 3D shape classification and retrieval"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string split = "all";
  std::string model_path;
  double target_accuracy = -2.0;

  CLI::App* render = app.add_subcommand("render", "Ray-cast depth images for a manifest");
  add_common(render, args);
  render->add_option("--split", split, "train | val | test | all");

  CLI::App* train = app.add_subcommand("train", "Train the backbone on plain views");
  add_common(train, args);
  train->add_option("--target-accuracy", target_accuracy,
                    "Stop once eval accuracy reaches this value");

  CLI::App* select = app.add_subcommand("select", "Learn per-view weights on the frozen backbone");
  add_common(select, args);

  CLI::App* ensemble = app.add_subcommand("ensemble", "Fine-tune on the selected views");
  add_common(ensemble, args);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  add_common(eval, args);
  eval->add_option("--model", model_path, "Checkpoint to evaluate (default out/model.spnw)");
  eval->add_option("--split", split, "train | val | test");

  CLI::App* retrieve = app.add_subcommand("retrieve", "Rank the test split by descriptor distance");
  add_common(retrieve, args);

  int synth_count = 30;
  int synth_classes = 5;
  double synth_train_fraction = 0.75;
  CLI::App* synth = app.add_subcommand("synth", "Generate a procedural labeled dataset");
  add_common(synth, args, false);
  synth->add_option("--count", synth_count, "Total object count");
  synth->add_option("--classes", synth_classes, "Class count (1..5)");
  synth->add_option("--train-fraction", synth_train_fraction, "Per-class train fraction");

  double gradcheck_tol = 1e-4;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  gradcheck->add_option("--tol", gradcheck_tol, "Maximum relative error");
  gradcheck->add_option("--seed", args.seed, "Deterministic seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed())
      return spnet::pipeline::cmd_render(args.manifest, build_config(args), args.out_dir, split);
    if (train->parsed()) {
      spnet::RunConfig config = build_config(args);
      if (target_accuracy > -2.0) config.train.target_accuracy = target_accuracy;
      return spnet::pipeline::cmd_train(args.manifest, config, args.out_dir);
    }
    if (select->parsed())
      return spnet::pipeline::cmd_select(args.manifest, build_config(args), args.out_dir);
    if (ensemble->parsed())
      return spnet::pipeline::cmd_ensemble(args.manifest, build_config(args), args.out_dir);
    if (eval->parsed()) {
      if (split == "all") split = "test";
      std::string model = model_path.empty() ? args.out_dir + "/model.spnw" : model_path;
      return spnet::pipeline::cmd_eval(args.manifest, build_config(args), args.out_dir, model,
                                       split);
    }
    if (retrieve->parsed())
      return spnet::pipeline::cmd_retrieve(args.manifest, build_config(args), args.out_dir);
    if (synth->parsed()) {
      spnet::SynthConfig sc;
      sc.count = synth_count;
      sc.classes = synth_classes;
      sc.train_fraction = synth_train_fraction;
      sc.seed = args.seed >= 0 ? uint64_t(args.seed) : 42;
      return spnet::pipeline::cmd_synth(args.out_dir, sc);
    }
    if (gradcheck->parsed())
      return spnet::pipeline::cmd_gradcheck(gradcheck_tol, args.seed >= 0 ? uint64_t(args.seed) : 1);
  } catch (const spnet::StageDependency& e) {
    std::cerr << "stage dependency: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
