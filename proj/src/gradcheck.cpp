#include "spnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "spnet/rng.hpp"

namespace spnet {

namespace {

struct Probe {
  double loss;
  std::array<std::vector<int32_t>, 3> argmax;
};

Probe loss_at(const SpnetModel& model, const Tensor& image, int label) {
  ForwardCache cache;
  std::vector<double> scores = spnet_forward(model, image, false, &cache);
  auto [loss, grad] = softmax_cross_entropy(scores, label);
  (void)grad;
  return {loss, cache.pool_argmax};
}

}  // namespace

GradCheckReport grad_check(const SpnetModel& model, const Tensor& image, int label, double step,
                           int samples_per_layer, uint64_t seed) {
  SpnetModel work = model;

  // Analytic gradients at the base point.
  Gradients grads = Gradients::zeros_like(work);
  ForwardCache cache;
  std::vector<double> scores = spnet_forward(work, image, false, &cache);
  auto [base_loss, d_scores] = softmax_cross_entropy(scores, label);
  (void)base_loss;
  spnet_backward(work, cache, d_scores, grads);

  std::vector<Tensor*> params;
  std::vector<std::string> names;
  work.for_each_param([&](const std::string& name, Tensor& t) {
    params.push_back(&t);
    names.push_back(name);
  });
  std::vector<Tensor*> grad_tensors;
  grads.for_each([&](Tensor& t) { grad_tensors.push_back(&t); });

  GradCheckReport report;
  Rng rng(seed);

  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& tensor = *params[p];
    const Tensor& analytic = *grad_tensors[p];
    int64_t n = tensor.size();

    std::vector<int64_t> candidates(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) candidates[size_t(i)] = i;
    rng.shuffle(candidates);

    GradCheckReport::Entry entry;
    entry.param = names[p];
    for (int64_t i : candidates) {
      if (entry.checked >= samples_per_layer) break;
      double saved = tensor.data[size_t(i)];
      tensor.data[size_t(i)] = saved + step;
      Probe up = loss_at(work, image, label);
      tensor.data[size_t(i)] = saved - step;
      Probe down = loss_at(work, image, label);
      tensor.data[size_t(i)] = saved;

      // The loss is piecewise smooth in the pool argmax pattern; a flipped
      // argmax means the secant straddles a kink where the comparison is
      // undefined. Skip and draw another index.
      if (up.argmax != down.argmax) continue;

      double numeric = (up.loss - down.loss) / (2.0 * step);
      double a = analytic.data[size_t(i)];
      double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-6});
      entry.max_rel_err = std::max(entry.max_rel_err, std::fabs(a - numeric) / denom);
      ++entry.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace spnet
