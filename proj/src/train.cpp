#include "spnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spnet/parallel.hpp"

namespace spnet {

Tensor image_to_tensor(const DepthImage& img) {
  Tensor t({1, img.rows, img.cols});
  double mean = 0;
  for (float p : img.pixels) mean += double(p);
  mean /= double(img.pixels.size());
  double var = 0;
  for (float p : img.pixels) {
    double d = double(p) - mean;
    var += d * d;
  }
  double inv_std = 1.0 / (std::sqrt(var / double(img.pixels.size())) + 1e-6);
  for (size_t i = 0; i < img.pixels.size(); ++i)
    t.data[i] = (double(img.pixels[i]) - mean) * inv_std;
  return t;
}

LabeledImage to_labeled(const DepthImage& img, int label) {
  LabeledImage out;
  out.image = image_to_tensor(img);
  out.label = label;
  out.id = img.source_id;
  return out;
}

EvalResult evaluate(const SpnetModel& model, const std::vector<LabeledImage>& data, int workers) {
  std::vector<double> losses(data.size(), 0.0);
  std::vector<uint8_t> hits(data.size(), 0);
  parallel_for(
      data.size(),
      [&](size_t i) {
        std::vector<double> scores = spnet_forward(model, data[i].image, false);
        auto [loss, grad] = softmax_cross_entropy(scores, data[i].label);
        (void)grad;
        losses[i] = loss;
        int pred = int(std::max_element(scores.begin(), scores.end()) - scores.begin());
        hits[i] = pred == data[i].label ? 1 : 0;
      },
      workers);
  EvalResult r;
  for (size_t i = 0; i < data.size(); ++i) {
    r.loss += losses[i];
    r.accuracy += hits[i];
  }
  if (!data.empty()) {
    r.loss /= double(data.size());
    r.accuracy /= double(data.size());
  }
  return r;
}

EvalResult train_epoch(SpnetModel& model, const std::vector<LabeledImage>& train, int epoch,
                       const TrainConfig& config) {
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng(config.seed).fork(uint64_t(epoch)).shuffle(order);

  double loss_sum = 0;
  int correct = 0;

  struct Sample {
    Gradients grads;
    double loss{0};
    bool hit{false};
  };

  for (size_t start = 0; start < order.size(); start += size_t(config.batch_size)) {
    size_t stop = std::min(order.size(), start + size_t(config.batch_size));
    std::vector<Sample> partial(stop - start);

    parallel_for(
        stop - start,
        [&](size_t bi) {
          int idx = order[start + bi];
          const LabeledImage& sample = train[size_t(idx)];
          Sample& out = partial[bi];
          out.grads = Gradients::zeros_like(model);

          // Mask stream keyed by (epoch, dataset index): independent of the
          // batch layout and the worker count.
          Rng drop_rng = Rng(config.seed).fork(uint64_t(epoch) * 1000003u + uint64_t(idx));
          ForwardCache cache;
          std::vector<double> scores =
              spnet_forward(model, sample.image, true, &cache, &drop_rng);
          auto [loss, d_scores] = softmax_cross_entropy(scores, sample.label);
          out.loss = loss;
          out.hit = int(std::max_element(scores.begin(), scores.end()) - scores.begin()) ==
                    sample.label;
          spnet_backward(model, cache, d_scores, out.grads);
        },
        config.workers);

    Gradients total = Gradients::zeros_like(model);
    for (const Sample& s : partial) {
      total.accumulate(s.grads);
      loss_sum += s.loss;
      correct += s.hit ? 1 : 0;
    }
    total.scale(1.0 / double(stop - start));
    sgd_step(model, total, config.learning_rate);
  }

  return {loss_sum / double(train.size()), double(correct) / double(train.size())};
}

SpnetModel train_backbone(const std::vector<LabeledImage>& train,
                          const std::vector<LabeledImage>* eval_set, int classes,
                          const TrainConfig& config, const EpochLog& log) {
  if (train.empty()) throw ShapeMismatch("train_backbone: empty training set");
  SpnetModel model = SpnetModel::init(classes, config.seed, config.dropout_rate);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EvalResult tr = train_epoch(model, train, epoch, config);
    if (log) log(epoch, "train", tr.loss, tr.accuracy);

    bool check_now = eval_set && ((epoch + 1) % std::max(1, config.eval_every) == 0 ||
                                  epoch + 1 == config.epochs);
    if (check_now) {
      EvalResult ev = evaluate(model, *eval_set, config.workers);
      if (log) log(epoch, "eval", ev.loss, ev.accuracy);
      if (config.target_accuracy >= 0.0 && ev.accuracy >= config.target_accuracy) break;
    }
  }
  return model;
}

}  // namespace spnet
