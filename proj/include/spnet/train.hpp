#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spnet/depth_image.hpp"
#include "spnet/model.hpp"

namespace spnet {

struct TrainConfig {
  double learning_rate{0.01};
  int batch_size{8};
  int epochs{200};
  double dropout_rate{0.2};
  uint64_t seed{42};
  int workers{0};
  /// Stop once the eval split reaches this accuracy (checked every
  /// eval_every epochs); negative disables early stopping.
  double target_accuracy{-1.0};
  int eval_every{5};
};

struct LabeledImage {
  Tensor image;  // (1, H, W)
  int label{0};
  std::string id;
};

/// Network input: the depth raster standardized to zero mean and unit
/// variance per image (constant images map to zero).
Tensor image_to_tensor(const DepthImage& img);

LabeledImage to_labeled(const DepthImage& img, int label);

struct EvalResult {
  double loss{0};
  double accuracy{0};
};

EvalResult evaluate(const SpnetModel& model, const std::vector<LabeledImage>& data,
                    int workers = 0);

/// epoch, split name, loss, accuracy.
using EpochLog = std::function<void(int, const std::string&, double, double)>;

/// Minibatch SGD over the single-view dataset. Per-sample gradients are
/// computed concurrently and reduced in sample order, so the trajectory is
/// identical for any worker count.
SpnetModel train_backbone(const std::vector<LabeledImage>& train,
                          const std::vector<LabeledImage>* eval_set, int classes,
                          const TrainConfig& config, const EpochLog& log = {});

/// One epoch of SGD on an existing model (exposed for the overfit and
/// determinism checks). Returns mean loss and accuracy over `train`.
EvalResult train_epoch(SpnetModel& model, const std::vector<LabeledImage>& train, int epoch,
                       const TrainConfig& config);

}  // namespace spnet
