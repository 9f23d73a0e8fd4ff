#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spnet/rng.hpp"
#include "spnet/tensor.hpp"

namespace spnet {

// Dense kernels for the shallow CNN. Inputs are CHW tensors; every function
// validates shapes and throws ShapeMismatch on disagreement.

/// 3x3 cross-correlation, zero padding 1, stride 1. weights: (C_out, C_in, 3, 3),
/// bias: (C_out). Output spatial size equals input.
void conv3x3_forward(const Tensor& in, const Tensor& weights, const Tensor& bias, Tensor& out);

/// Gradients of conv3x3_forward. d_in is overwritten; d_weights and d_bias
/// are accumulated into (callers zero them), so per-view contributions sum.
void conv3x3_backward(const Tensor& in, const Tensor& weights, const Tensor& d_out, Tensor& d_in,
                      Tensor& d_weights, Tensor& d_bias);

/// 2x2 max pooling, stride 2. Requires even spatial dims (OddSpatialDim
/// otherwise). argmax records the flat input index feeding each output.
void maxpool2x2_forward(const Tensor& in, Tensor& out, std::vector<int32_t>& argmax);
void maxpool2x2_backward(const Tensor& d_out, const std::vector<int32_t>& argmax, Tensor& d_in);

/// Per-channel spatial mean: (C, H, W) -> (C).
void global_avg_pool_forward(const Tensor& in, Tensor& out);
void global_avg_pool_backward(const Tensor& d_out, int height, int width, Tensor& d_in);

/// Elementwise tanh in place.
void tanh_forward(Tensor& x);
/// d_y *= 1 - y^2, using the cached forward output y.
void tanh_backward(const Tensor& y, Tensor& d_y);

/// Inverted dropout in place: kept activations scale by 1/(1-rate) so
/// inference needs no rescaling. mask records kept positions.
void dropout_forward(Tensor& x, double rate, Rng& rng, std::vector<uint8_t>& mask);
void dropout_backward(const std::vector<uint8_t>& mask, double rate, Tensor& d_x);

/// Fully connected: out = W x + b with W: (n_out, n_in). Backward overwrites
/// d_x and accumulates into d_weights / d_bias.
void fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias, Tensor& out);
void fc_backward(const Tensor& x, const Tensor& weights, const Tensor& d_out, Tensor& d_x,
                 Tensor& d_weights, Tensor& d_bias);

std::vector<double> softmax(std::span<const double> scores);

/// Numerically stabilized softmax cross-entropy. Returns the loss and
/// d loss / d scores (= softmax - onehot).
std::pair<double, std::vector<double>> softmax_cross_entropy(std::span<const double> scores,
                                                             int label);

}  // namespace spnet
