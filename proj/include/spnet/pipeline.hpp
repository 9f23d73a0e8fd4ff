#pragma once

#include <filesystem>
#include <string>

#include "spnet/config.hpp"
#include "spnet/dataset.hpp"

namespace spnet {

/// Stage commands behind the CLI. Each consumes the previous stage's
/// artifacts under `out_dir` and throws StageDependency when they are
/// missing. Return value is the process exit code (nonzero when any
/// record-level error occurred).
namespace pipeline {

/// out_dir/images/<preset>/<object_id>/viewNN.spdi; resumable. `split` limits
/// rendering to one manifest split ("all" renders everything). The selected
/// preset writes into the bank64 archive using the bank indices.
int cmd_render(const std::filesystem::path& manifest_path, const RunConfig& config,
               const std::filesystem::path& out_dir, const std::string& split = "all");

/// Trains the backbone on the plain view of the train split; writes
/// model.spnw and train_log.csv.
int cmd_train(const std::filesystem::path& manifest_path, const RunConfig& config,
              const std::filesystem::path& out_dir);

/// Learns the 64-view weights on the frozen backbone; writes selection.spnw
/// (backbone + bank) and selection_weights.csv.
int cmd_select(const std::filesystem::path& manifest_path, const RunConfig& config,
               const std::filesystem::path& out_dir);

/// Fine-tunes backbone and ensemble weights on the selected views; writes
/// ensemble.spnw and ensemble_log.csv.
int cmd_ensemble(const std::filesystem::path& manifest_path, const RunConfig& config,
                 const std::filesystem::path& out_dir);

/// Accuracy/loss of a checkpoint on a split; writes metrics.json. Ensemble
/// checkpoints evaluate with their selected views, plain ones on view 0.
int cmd_eval(const std::filesystem::path& manifest_path, const RunConfig& config,
             const std::filesystem::path& out_dir, const std::filesystem::path& model_path,
             const std::string& split = "test");

/// Descriptor ranking over the test split; writes rankings.csv,
/// retrieval_metrics.json and similarity.spdi.
int cmd_retrieve(const std::filesystem::path& manifest_path, const RunConfig& config,
                 const std::filesystem::path& out_dir);

int cmd_synth(const std::filesystem::path& out_dir, const SynthConfig& config);

/// Finite-difference check of every layer and of the ensemble view weights;
/// prints a per-parameter table. Returns 0 when all errors are below tol.
int cmd_gradcheck(double tolerance, uint64_t seed);

}  // namespace pipeline

}  // namespace spnet
