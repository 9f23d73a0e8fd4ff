#include "spnet/layers.hpp"

#include <algorithm>
#include <cmath>

namespace spnet {

namespace {

void require_chw(const Tensor& t, const char* what) {
  if (t.shape.size() != 3) throw ShapeMismatch(std::string(what) + ": expected a CHW tensor");
}

}  // namespace

void conv3x3_forward(const Tensor& in, const Tensor& weights, const Tensor& bias, Tensor& out) {
  require_chw(in, "conv3x3_forward input");
  int c_in = in.dim(0), h = in.dim(1), w = in.dim(2);
  if (weights.shape.size() != 4 || weights.dim(1) != c_in || weights.dim(2) != 3 ||
      weights.dim(3) != 3)
    throw ShapeMismatch("conv3x3_forward: weights must be (C_out, C_in, 3, 3)");
  int c_out = weights.dim(0);
  bias.require_shape({c_out}, "conv3x3_forward bias");

  if (out.shape != std::vector<int>{c_out, h, w}) out = Tensor({c_out, h, w});
  const double* src = in.ptr();
  const double* wt = weights.ptr();
  double* dst = out.ptr();

  for (int co = 0; co < c_out; ++co) {
    double* plane = dst + size_t(co) * h * w;
    std::fill(plane, plane + size_t(h) * w, bias.data[size_t(co)]);
    for (int ci = 0; ci < c_in; ++ci) {
      const double* in_plane = src + size_t(ci) * h * w;
      const double* kernel = wt + (size_t(co) * c_in + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        double k0 = kernel[ky * 3], k1 = kernel[ky * 3 + 1], k2 = kernel[ky * 3 + 2];
        for (int y = 0; y < h; ++y) {
          int iy = y + ky - 1;
          if (iy < 0 || iy >= h) continue;
          const double* r = in_plane + size_t(iy) * w;
          double* o = plane + size_t(y) * w;
          o[0] += k1 * r[0] + k2 * r[1];
          for (int x = 1; x < w - 1; ++x) o[x] += k0 * r[x - 1] + k1 * r[x] + k2 * r[x + 1];
          o[w - 1] += k0 * r[w - 2] + k1 * r[w - 1];
        }
      }
    }
  }
}

void conv3x3_backward(const Tensor& in, const Tensor& weights, const Tensor& d_out, Tensor& d_in,
                      Tensor& d_weights, Tensor& d_bias) {
  int c_in = in.dim(0), h = in.dim(1), w = in.dim(2);
  int c_out = weights.dim(0);
  d_out.require_shape({c_out, h, w}, "conv3x3_backward d_out");

  if (d_in.shape != in.shape) d_in = Tensor(in.shape);
  else d_in.fill(0.0);
  if (d_weights.shape != weights.shape) d_weights = Tensor(weights.shape);
  if (d_bias.shape != std::vector<int>{c_out}) d_bias = Tensor({c_out});

  const double* src = in.ptr();
  const double* wt = weights.ptr();
  const double* grad = d_out.ptr();

  for (int co = 0; co < c_out; ++co) {
    const double* g_plane = grad + size_t(co) * h * w;
    double b = 0;
    for (int i = 0; i < h * w; ++i) b += g_plane[i];
    d_bias.data[size_t(co)] += b;

    for (int ci = 0; ci < c_in; ++ci) {
      const double* in_plane = src + size_t(ci) * h * w;
      double* din_plane = d_in.ptr() + size_t(ci) * h * w;
      const double* kernel = wt + (size_t(co) * c_in + ci) * 9;
      double* d_kernel = d_weights.ptr() + (size_t(co) * c_in + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        double k0 = kernel[ky * 3], k1 = kernel[ky * 3 + 1], k2 = kernel[ky * 3 + 2];
        double dk0 = 0, dk1 = 0, dk2 = 0;
        for (int y = 0; y < h; ++y) {
          int iy = y + ky - 1;
          if (iy < 0 || iy >= h) continue;
          const double* r = in_plane + size_t(iy) * w;
          double* di = din_plane + size_t(iy) * w;
          const double* g = g_plane + size_t(y) * w;

          di[0] += k0 * g[1] + k1 * g[0];
          for (int x = 1; x < w - 1; ++x) di[x] += k0 * g[x + 1] + k1 * g[x] + k2 * g[x - 1];
          di[w - 1] += k1 * g[w - 1] + k2 * g[w - 2];

          double a0 = 0, a1 = 0, a2 = 0;
          for (int x = 1; x < w; ++x) a0 += r[x - 1] * g[x];
          for (int x = 0; x < w; ++x) a1 += r[x] * g[x];
          for (int x = 0; x < w - 1; ++x) a2 += r[x + 1] * g[x];
          dk0 += a0;
          dk1 += a1;
          dk2 += a2;
        }
        d_kernel[ky * 3] += dk0;
        d_kernel[ky * 3 + 1] += dk1;
        d_kernel[ky * 3 + 2] += dk2;
      }
    }
  }
}

void maxpool2x2_forward(const Tensor& in, Tensor& out, std::vector<int32_t>& argmax) {
  require_chw(in, "maxpool2x2 input");
  int c = in.dim(0), h = in.dim(1), w = in.dim(2);
  if (h % 2 != 0 || w % 2 != 0)
    throw OddSpatialDim("maxpool2x2: spatial dims must be even, got " + std::to_string(h) + "x" +
                        std::to_string(w));
  int oh = h / 2, ow = w / 2;
  if (out.shape != std::vector<int>{c, oh, ow}) out = Tensor({c, oh, ow});
  argmax.assign(size_t(c) * oh * ow, 0);

  const double* src = in.ptr();
  double* dst = out.ptr();
  for (int ch = 0; ch < c; ++ch) {
    const double* plane = src + size_t(ch) * h * w;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int base = (2 * y) * w + 2 * x;
        int idx[4] = {base, base + 1, base + w, base + w + 1};
        int best = idx[0];
        for (int k = 1; k < 4; ++k)
          if (plane[idx[k]] > plane[best]) best = idx[k];
        size_t o = (size_t(ch) * oh + y) * ow + x;
        dst[o] = plane[best];
        argmax[o] = int32_t(size_t(ch) * h * w) + best;
      }
    }
  }
}

void maxpool2x2_backward(const Tensor& d_out, const std::vector<int32_t>& argmax, Tensor& d_in) {
  d_in.fill(0.0);
  const double* g = d_out.ptr();
  for (size_t i = 0; i < argmax.size(); ++i) d_in.data[size_t(argmax[i])] += g[i];
}

void global_avg_pool_forward(const Tensor& in, Tensor& out) {
  require_chw(in, "global_avg_pool input");
  int c = in.dim(0), h = in.dim(1), w = in.dim(2);
  if (out.shape != std::vector<int>{c}) out = Tensor({c});
  double inv = 1.0 / (double(h) * double(w));
  for (int ch = 0; ch < c; ++ch) {
    const double* plane = in.ptr() + size_t(ch) * h * w;
    double s = 0;
    for (int i = 0; i < h * w; ++i) s += plane[i];
    out.data[size_t(ch)] = s * inv;
  }
}

void global_avg_pool_backward(const Tensor& d_out, int height, int width, Tensor& d_in) {
  int c = d_out.dim(0);
  if (d_in.shape != std::vector<int>{c, height, width}) d_in = Tensor({c, height, width});
  double inv = 1.0 / (double(height) * double(width));
  for (int ch = 0; ch < c; ++ch) {
    double g = d_out.data[size_t(ch)] * inv;
    double* plane = d_in.ptr() + size_t(ch) * height * width;
    std::fill(plane, plane + size_t(height) * width, g);
  }
}

void tanh_forward(Tensor& x) {
  for (auto& v : x.data) v = std::tanh(v);
}

void tanh_backward(const Tensor& y, Tensor& d_y) {
  if (y.shape != d_y.shape) throw ShapeMismatch("tanh_backward: shape disagreement");
  for (size_t i = 0; i < y.data.size(); ++i) d_y.data[i] *= 1.0 - y.data[i] * y.data[i];
}

void dropout_forward(Tensor& x, double rate, Rng& rng, std::vector<uint8_t>& mask) {
  mask.assign(x.data.size(), 1);
  if (rate <= 0.0) return;
  double keep = 1.0 - rate;
  double inv_keep = 1.0 / keep;
  for (size_t i = 0; i < x.data.size(); ++i) {
    if (rng.uniform() < rate) {
      mask[i] = 0;
      x.data[i] = 0.0;
    } else {
      x.data[i] *= inv_keep;
    }
  }
}

void dropout_backward(const std::vector<uint8_t>& mask, double rate, Tensor& d_x) {
  if (mask.size() != d_x.data.size()) throw ShapeMismatch("dropout_backward: mask size mismatch");
  if (rate <= 0.0) return;
  double inv_keep = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < mask.size(); ++i) d_x.data[i] = mask[i] ? d_x.data[i] * inv_keep : 0.0;
}

void fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias, Tensor& out) {
  if (weights.shape.size() != 2) throw ShapeMismatch("fc_forward: weights must be 2-D");
  int n_out = weights.dim(0), n_in = weights.dim(1);
  x.require_shape({n_in}, "fc_forward input");
  bias.require_shape({n_out}, "fc_forward bias");
  if (out.shape != std::vector<int>{n_out}) out = Tensor({n_out});
  for (int o = 0; o < n_out; ++o) {
    const double* row = weights.ptr() + size_t(o) * n_in;
    double s = bias.data[size_t(o)];
    for (int i = 0; i < n_in; ++i) s += row[i] * x.data[size_t(i)];
    out.data[size_t(o)] = s;
  }
}

void fc_backward(const Tensor& x, const Tensor& weights, const Tensor& d_out, Tensor& d_x,
                 Tensor& d_weights, Tensor& d_bias) {
  int n_out = weights.dim(0), n_in = weights.dim(1);
  d_out.require_shape({n_out}, "fc_backward d_out");
  if (d_x.shape != std::vector<int>{n_in}) d_x = Tensor({n_in});
  else d_x.fill(0.0);
  if (d_weights.shape != weights.shape) d_weights = Tensor(weights.shape);
  if (d_bias.shape != std::vector<int>{n_out}) d_bias = Tensor({n_out});

  for (int o = 0; o < n_out; ++o) {
    double g = d_out.data[size_t(o)];
    d_bias.data[size_t(o)] += g;
    const double* row = weights.ptr() + size_t(o) * n_in;
    double* drow = d_weights.ptr() + size_t(o) * n_in;
    for (int i = 0; i < n_in; ++i) {
      drow[i] += g * x.data[size_t(i)];
      d_x.data[size_t(i)] += g * row[i];
    }
  }
}

std::vector<double> softmax(std::span<const double> scores) {
  double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::pair<double, std::vector<double>> softmax_cross_entropy(std::span<const double> scores,
                                                             int label) {
  if (label < 0 || size_t(label) >= scores.size())
    throw ShapeMismatch("softmax_cross_entropy: label " + std::to_string(label) +
                        " out of range for " + std::to_string(scores.size()) + " classes");
  std::vector<double> p = softmax(scores);
  double loss = -std::log(std::max(p[size_t(label)], 1e-300));
  p[size_t(label)] -= 1.0;  // gradient = softmax - onehot
  return {loss, std::move(p)};
}

}  // namespace spnet
