#include "spnet/model.hpp"

#include <cmath>

namespace spnet {

namespace {

// Glorot-uniform with the tanh gain 5/3.
void glorot_fill(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  double limit = (5.0 / 3.0) * std::sqrt(6.0 / double(fan_in + fan_out));
  for (auto& v : t.data) v = rng.uniform(-limit, limit);
}

}  // namespace

SpnetModel SpnetModel::init(int classes, uint64_t seed, double dropout_rate, int fc1_width) {
  if (classes < 2) throw ShapeMismatch("SpnetModel: need at least 2 classes");
  SpnetModel m;
  m.classes = classes;
  m.fc1_width = fc1_width;
  m.dropout_rate = dropout_rate;
  m.rng_seed = seed;

  Rng rng(seed);
  int c_prev = 1;
  for (int k = 0; k < 4; ++k) {
    int c_out = kConvChannels[size_t(k)];
    m.conv_w[size_t(k)] = Tensor({c_out, c_prev, 3, 3});
    m.conv_b[size_t(k)] = Tensor({c_out});
    glorot_fill(m.conv_w[size_t(k)], c_prev * 9, c_out * 9, rng);
    c_prev = c_out;
  }
  m.fc1_w = Tensor({fc1_width, kConvChannels[3]});
  m.fc1_b = Tensor({fc1_width});
  glorot_fill(m.fc1_w, kConvChannels[3], fc1_width, rng);
  m.fc2_w = Tensor({classes, fc1_width});
  m.fc2_b = Tensor({classes});
  glorot_fill(m.fc2_w, fc1_width, classes, rng);

  m.snap_to_f32();
  return m;
}

int64_t SpnetModel::parameter_count() const {
  int64_t n = 0;
  for_each_param([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

void SpnetModel::for_each_param(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (int k = 0; k < 4; ++k) {
    fn("conv" + std::to_string(k + 1) + "_w", conv_w[size_t(k)]);
    fn("conv" + std::to_string(k + 1) + "_b", conv_b[size_t(k)]);
  }
  fn("fc1_w", fc1_w);
  fn("fc1_b", fc1_b);
  fn("fc2_w", fc2_w);
  fn("fc2_b", fc2_b);
}

void SpnetModel::for_each_param(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<SpnetModel*>(this)->for_each_param(
      [&](const std::string& name, Tensor& t) { fn(name, t); });
}

void SpnetModel::snap_to_f32() {
  for_each_param([](const std::string&, Tensor& t) {
    for (auto& v : t.data) v = double(float(v));
  });
}

std::vector<double> spnet_forward(const SpnetModel& model, const Tensor& image, bool train_mode,
                                  ForwardCache* cache, Rng* dropout_rng) {
  if (image.shape.size() != 3 || image.dim(0) != 1)
    throw ShapeMismatch("spnet_forward: expected a (1, H, W) image");
  if (train_mode && model.dropout_rate > 0.0 && dropout_rng == nullptr)
    throw ShapeMismatch("spnet_forward: train_mode requires a dropout rng");

  ForwardCache local;
  ForwardCache& cc = cache ? *cache : local;
  cc.input = image;

  Tensor x = image;
  Tensor conv_out;
  for (int k = 0; k < 4; ++k) {
    cc.conv_in[size_t(k)] = x;
    conv3x3_forward(x, model.conv_w[size_t(k)], model.conv_b[size_t(k)], conv_out);
    tanh_forward(conv_out);
    cc.conv_act[size_t(k)] = conv_out;
    if (k < 3) {
      maxpool2x2_forward(conv_out, x, cc.pool_argmax[size_t(k)]);
    } else {
      global_avg_pool_forward(conv_out, x);
    }
    if (train_mode && model.dropout_rate > 0.0) {
      dropout_forward(x, model.dropout_rate, *dropout_rng, cc.drop_mask[size_t(k)]);
    } else {
      cc.drop_mask[size_t(k)].clear();
    }
  }

  cc.fc1_in = x;
  Tensor fc1_out;
  fc_forward(x, model.fc1_w, model.fc1_b, fc1_out);
  tanh_forward(fc1_out);
  if (train_mode && model.dropout_rate > 0.0)
    dropout_forward(fc1_out, model.dropout_rate, *dropout_rng, cc.drop_mask[4]);
  else
    cc.drop_mask[4].clear();
  cc.fc1_act = fc1_out;

  fc_forward(fc1_out, model.fc2_w, model.fc2_b, cc.scores);
  return cc.scores.data;
}

Gradients Gradients::zeros_like(const SpnetModel& model) {
  Gradients g;
  for (int k = 0; k < 4; ++k) {
    g.conv_w[size_t(k)] = Tensor(model.conv_w[size_t(k)].shape);
    g.conv_b[size_t(k)] = Tensor(model.conv_b[size_t(k)].shape);
  }
  g.fc1_w = Tensor(model.fc1_w.shape);
  g.fc1_b = Tensor(model.fc1_b.shape);
  g.fc2_w = Tensor(model.fc2_w.shape);
  g.fc2_b = Tensor(model.fc2_b.shape);
  return g;
}

void Gradients::for_each(const std::function<void(Tensor&)>& fn) {
  for (int k = 0; k < 4; ++k) {
    fn(conv_w[size_t(k)]);
    fn(conv_b[size_t(k)]);
  }
  fn(fc1_w);
  fn(fc1_b);
  fn(fc2_w);
  fn(fc2_b);
}

void Gradients::accumulate(const Gradients& other) {
  auto add = [](Tensor& a, const Tensor& b) {
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
  };
  for (int k = 0; k < 4; ++k) {
    add(conv_w[size_t(k)], other.conv_w[size_t(k)]);
    add(conv_b[size_t(k)], other.conv_b[size_t(k)]);
  }
  add(fc1_w, other.fc1_w);
  add(fc1_b, other.fc1_b);
  add(fc2_w, other.fc2_w);
  add(fc2_b, other.fc2_b);
}

void Gradients::scale(double s) {
  for_each([s](Tensor& t) {
    for (auto& v : t.data) v *= s;
  });
}

void spnet_backward(const SpnetModel& model, const ForwardCache& cache,
                    std::span<const double> d_scores, Gradients& grads) {
  if (int(d_scores.size()) != model.classes)
    throw ShapeMismatch("spnet_backward: d_scores size mismatch");

  Tensor d = Tensor({model.classes});
  std::copy(d_scores.begin(), d_scores.end(), d.data.begin());

  Tensor d_fc1_act;
  fc_backward(cache.fc1_act, model.fc2_w, d, d_fc1_act, grads.fc2_w, grads.fc2_b);
  if (!cache.drop_mask[4].empty())
    dropout_backward(cache.drop_mask[4], model.dropout_rate, d_fc1_act);
  tanh_backward(cache.fc1_act, d_fc1_act);

  Tensor d_gap;
  fc_backward(cache.fc1_in, model.fc1_w, d_fc1_act, d_gap, grads.fc1_w, grads.fc1_b);

  // conv4 block: GAP -> tanh -> conv.
  if (!cache.drop_mask[3].empty()) dropout_backward(cache.drop_mask[3], model.dropout_rate, d_gap);
  Tensor d_act;
  global_avg_pool_backward(d_gap, cache.conv_act[3].dim(1), cache.conv_act[3].dim(2), d_act);
  tanh_backward(cache.conv_act[3], d_act);
  Tensor d_below;
  conv3x3_backward(cache.conv_in[3], model.conv_w[3], d_act, d_below, grads.conv_w[3],
                   grads.conv_b[3]);

  for (int k = 2; k >= 0; --k) {
    if (!cache.drop_mask[size_t(k)].empty())
      dropout_backward(cache.drop_mask[size_t(k)], model.dropout_rate, d_below);
    if (d_act.shape != cache.conv_act[size_t(k)].shape)
      d_act = Tensor(cache.conv_act[size_t(k)].shape);
    maxpool2x2_backward(d_below, cache.pool_argmax[size_t(k)], d_act);
    tanh_backward(cache.conv_act[size_t(k)], d_act);
    conv3x3_backward(cache.conv_in[size_t(k)], model.conv_w[size_t(k)], d_act, d_below,
                     grads.conv_w[size_t(k)], grads.conv_b[size_t(k)]);
  }
}

void sgd_step(SpnetModel& model, const Gradients& grads, double lr) {
  auto update = [lr](Tensor& w, const Tensor& g) {
    for (size_t i = 0; i < w.data.size(); ++i) w.data[i] = double(float(w.data[i] - lr * g.data[i]));
  };
  for (int k = 0; k < 4; ++k) {
    update(model.conv_w[size_t(k)], grads.conv_w[size_t(k)]);
    update(model.conv_b[size_t(k)], grads.conv_b[size_t(k)]);
  }
  update(model.fc1_w, grads.fc1_w);
  update(model.fc1_b, grads.fc1_b);
  update(model.fc2_w, grads.fc2_w);
  update(model.fc2_b, grads.fc2_b);
}

}  // namespace spnet
