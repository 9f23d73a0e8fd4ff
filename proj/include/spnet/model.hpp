#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spnet/layers.hpp"
#include "spnet/tensor.hpp"

namespace spnet {

/// The shallow backbone: four 3x3 conv blocks (24, 32, 48, 64 feature maps)
/// with tanh and 2x2 max pooling, global average pooling after the last conv,
/// then fc 64 -> fc1_width -> classes. Raw fc2 outputs are the view scores.
struct SpnetModel {
  static constexpr std::array<int, 4> kConvChannels = {24, 32, 48, 64};

  int classes{10};
  int fc1_width{512};
  double dropout_rate{0.2};
  uint64_t rng_seed{0};

  std::array<Tensor, 4> conv_w;
  std::array<Tensor, 4> conv_b;
  Tensor fc1_w, fc1_b;
  Tensor fc2_w, fc2_b;

  /// Glorot-uniform weights (zero biases), snapped to f32 values.
  static SpnetModel init(int classes, uint64_t seed, double dropout_rate = 0.2,
                         int fc1_width = 512);

  int64_t parameter_count() const;

  /// Fixed-order traversal of (name, tensor) pairs; the checkpoint layout and
  /// every gradient reduction follow this order.
  void for_each_param(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_param(const std::function<void(const std::string&, const Tensor&)>& fn) const;

  /// Rounds every parameter to its nearest f32 value. Parameters hold
  /// f32-representable values at all times so checkpoints are lossless;
  /// init() and sgd_step() maintain the invariant.
  void snap_to_f32();
};

/// Per-layer activations kept for backprop.
struct ForwardCache {
  Tensor input;
  std::array<Tensor, 4> conv_in;   // input to conv k
  std::array<Tensor, 4> conv_act;  // tanh output of conv k
  std::array<std::vector<int32_t>, 3> pool_argmax;
  std::array<std::vector<uint8_t>, 5> drop_mask;  // conv blocks 0..3, fc1
  Tensor fc1_in;  // pooled features after the conv stack
  Tensor fc1_act;  // tanh output
  Tensor scores;
};

/// Runs the backbone on a (1, H, W) image and returns the class scores.
/// train_mode applies inverted dropout, drawing masks from `dropout_rng`.
std::vector<double> spnet_forward(const SpnetModel& model, const Tensor& image, bool train_mode,
                                  ForwardCache* cache = nullptr, Rng* dropout_rng = nullptr);

struct Gradients {
  std::array<Tensor, 4> conv_w;
  std::array<Tensor, 4> conv_b;
  Tensor fc1_w, fc1_b;
  Tensor fc2_w, fc2_b;

  static Gradients zeros_like(const SpnetModel& model);
  void accumulate(const Gradients& other);
  void scale(double s);
  void for_each(const std::function<void(Tensor&)>& fn);
};

/// Backprop from d loss / d scores through the cached forward pass.
/// Accumulates into grads, so several views can share one buffer.
void spnet_backward(const SpnetModel& model, const ForwardCache& cache,
                    std::span<const double> d_scores, Gradients& grads);

/// Plain SGD: w <- w - lr * g, then re-snap to f32 values.
void sgd_step(SpnetModel& model, const Gradients& grads, double lr);

}  // namespace spnet
