#include "spnet/multiview.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spnet/errors.hpp"
#include "spnet/parallel.hpp"
#include "spnet/train.hpp"

namespace spnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::vector<Rotation> rotation_grid(int azimuth_steps, int elevation_steps) {
  std::vector<Rotation> out;
  out.reserve(size_t(azimuth_steps) * size_t(elevation_steps));
  for (int e = 0; e < elevation_steps; ++e)
    for (int a = 0; a < azimuth_steps; ++a)
      out.emplace_back(2.0 * kPi * a / azimuth_steps, 2.0 * kPi * e / elevation_steps);
  return out;
}

ViewPreset preset_from_name(const std::string& name) {
  if (name == "plain") return ViewPreset::Plain;
  if (name == "major_axes") return ViewPreset::MajorAxes;
  if (name == "mvcnn12") return ViewPreset::Mvcnn12;
  if (name == "bank64") return ViewPreset::Bank64;
  if (name == "selected") return ViewPreset::Selected;
  throw ConfigError("unknown view preset '" + name + "'");
}

const char* preset_name(ViewPreset preset) {
  switch (preset) {
    case ViewPreset::Plain: return "plain";
    case ViewPreset::MajorAxes: return "major_axes";
    case ViewPreset::Mvcnn12: return "mvcnn12";
    case ViewPreset::Bank64: return "bank64";
    case ViewPreset::Selected: return "selected";
  }
  return "unknown";
}

std::vector<Rotation> preset_rotations(ViewPreset preset, const ViewBank* bank) {
  switch (preset) {
    case ViewPreset::Plain:
      return {Rotation{}};
    case ViewPreset::MajorAxes:
      // Views along x, y, z: identity, a quarter turn about z, a quarter
      // turn about y.
      return {Rotation{}, Rotation(kPi / 2.0, 0.0), Rotation(0.0, kPi / 2.0)};
    case ViewPreset::Mvcnn12: {
      std::vector<Rotation> out;
      for (int k = 0; k < 12; ++k) out.emplace_back(2.0 * kPi * k / 12.0, kPi / 6.0);
      return out;
    }
    case ViewPreset::Bank64:
      return rotation_grid();
    case ViewPreset::Selected: {
      if (bank == nullptr || bank->selected.empty())
        throw StageDependency("selected preset requires a trained view bank");
      std::vector<Rotation> out;
      out.reserve(bank->selected.size());
      for (int idx : bank->selected) out.push_back(bank->rotations[size_t(idx)]);
      return out;
    }
  }
  throw ConfigError("bad view preset");
}

std::vector<DepthImage> generate_views(const TriangleMesh& mesh, Projection kind,
                                       const std::vector<Rotation>& rotations, int size,
                                       HitRule rule, int workers) {
  Renderer renderer(mesh, rule);
  std::vector<DepthImage> views(rotations.size());
  parallel_for(
      rotations.size(), [&](size_t j) { views[j] = renderer.render(kind, rotations[j], size); },
      workers);
  return views;
}

ScoreMatrix view_scores(const SpnetModel& model, const std::vector<DepthImage>& views,
                        int workers) {
  ScoreMatrix m;
  m.views = int(views.size());
  m.classes = model.classes;
  m.data.assign(size_t(m.views) * m.classes, 0.0);
  parallel_for(
      views.size(),
      [&](size_t j) {
        Tensor img = image_to_tensor(views[j]);
        std::vector<double> s = spnet_forward(model, img, false);
        std::copy(s.begin(), s.end(), m.row(int(j)));
      },
      workers);
  return m;
}

Aggregation aggregation_from_name(const std::string& name) {
  if (name == "max") return Aggregation::MaxPool;
  if (name == "avg") return Aggregation::AvgPool;
  if (name == "weighted") return Aggregation::WeightedAverage;
  throw ConfigError("unknown aggregation '" + name + "'");
}

const char* aggregation_name(Aggregation agg) {
  switch (agg) {
    case Aggregation::MaxPool: return "max";
    case Aggregation::AvgPool: return "avg";
    case Aggregation::WeightedAverage: return "weighted";
  }
  return "unknown";
}

std::vector<double> aggregate(const ScoreMatrix& scores, Aggregation agg,
                              std::span<const double> weights) {
  if (scores.views == 0) throw EmptyViews("aggregate: no views to combine");
  std::vector<double> out(size_t(scores.classes), 0.0);

  switch (agg) {
    case Aggregation::MaxPool: {
      std::copy(scores.row(0), scores.row(0) + scores.classes, out.begin());
      for (int j = 1; j < scores.views; ++j) {
        const double* r = scores.row(j);
        for (int c = 0; c < scores.classes; ++c) out[size_t(c)] = std::max(out[size_t(c)], r[c]);
      }
      return out;
    }
    case Aggregation::AvgPool: {
      std::vector<double> uniform(size_t(scores.views), 1.0 / double(scores.views));
      return aggregate(scores, Aggregation::WeightedAverage, uniform);
    }
    case Aggregation::WeightedAverage: {
      if (int(weights.size()) != scores.views)
        throw ShapeMismatch("aggregate: need one weight per view");
      for (int j = 0; j < scores.views; ++j) {
        const double* r = scores.row(j);
        double w = weights[size_t(j)];
        for (int c = 0; c < scores.classes; ++c) out[size_t(c)] += w * r[c];
      }
      return out;
    }
  }
  throw ConfigError("bad aggregation");
}

std::vector<int> select_top(const ViewBank& bank, int top_m) {
  int n = int(bank.weights.size());
  if (top_m < 1 || top_m > n)
    throw ShapeMismatch("select_top: M must be in [1, " + std::to_string(n) + "]");
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    double wa = std::fabs(bank.weights[size_t(a)]);
    double wb = std::fabs(bank.weights[size_t(b)]);
    if (wa != wb) return wa > wb;
    return a < b;
  });
  idx.resize(size_t(top_m));
  return idx;
}

std::vector<double> weighted_aggregate_weight_grad(const ScoreMatrix& scores,
                                                   std::span<const double> weights, int label) {
  std::vector<double> agg = aggregate(scores, Aggregation::WeightedAverage, weights);
  auto [loss, d_agg] = softmax_cross_entropy(agg, label);
  (void)loss;
  std::vector<double> grad(weights.size(), 0.0);
  for (int j = 0; j < scores.views; ++j) {
    const double* r = scores.row(j);
    double g = 0;
    for (int c = 0; c < scores.classes; ++c) g += r[c] * d_agg[size_t(c)];
    grad[size_t(j)] = g;
  }
  return grad;
}

std::vector<double> train_view_weights(const std::vector<ScoreMatrix>& objects,
                                       const std::vector<int>& labels,
                                       const SelectionConfig& config) {
  if (objects.empty()) throw EmptyViews("train_view_weights: empty dataset");
  int n_views = objects.front().views;
  std::vector<double> w(size_t(n_views), double(float(1.0 / double(n_views))));

  Rng rng(config.seed);
  std::vector<int> order(objects.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng = rng.fork(uint64_t(epoch));
    epoch_rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += size_t(config.batch_size)) {
      size_t stop = std::min(order.size(), start + size_t(config.batch_size));
      std::vector<double> grad(w.size(), 0.0);
      for (size_t i = start; i < stop; ++i) {
        int obj = order[i];
        std::vector<double> g = weighted_aggregate_weight_grad(objects[size_t(obj)], w,
                                                               labels[size_t(obj)]);
        for (size_t j = 0; j < w.size(); ++j) grad[j] += g[j];
      }
      double scale = config.learning_rate / double(stop - start);
      for (size_t j = 0; j < w.size(); ++j)
        w[j] = double(float(w[j] - scale * grad[j]));
    }
  }
  return w;
}

ViewBank train_view_selection(const SpnetModel& backbone,
                              const std::function<std::vector<DepthImage>(int)>& views_of,
                              const std::vector<int>& labels, int object_count,
                              const std::vector<Rotation>& rotations, int top_m,
                              const SelectionConfig& config, int workers) {
  std::vector<ScoreMatrix> scores(static_cast<size_t>(object_count));
  for (int i = 0; i < object_count; ++i) {
    std::vector<DepthImage> views = views_of(i);
    if (views.size() != rotations.size())
      throw ShapeMismatch("train_view_selection: object " + std::to_string(i) + " has " +
                          std::to_string(views.size()) + " views, expected " +
                          std::to_string(rotations.size()));
    scores[size_t(i)] = view_scores(backbone, views, workers);
  }

  ViewBank bank;
  bank.rotations = rotations;
  bank.weights = train_view_weights(scores, labels, config);
  bank.selected = select_top(bank, top_m);
  return bank;
}

std::vector<double> ensemble_scores(const EnsembleModel& model,
                                    const std::vector<DepthImage>& selected_views, int workers) {
  ScoreMatrix scores = view_scores(model.backbone, selected_views, workers);
  if (model.aggregation == Aggregation::WeightedAverage)
    return aggregate(scores, model.aggregation, model.view_weights);
  return aggregate(scores, model.aggregation);
}

EnsembleModel train_ensemble(const SpnetModel& backbone_init, const ViewBank& bank,
                             const std::function<std::vector<DepthImage>(int)>& selected_views_of,
                             const std::vector<int>& labels, int object_count,
                             Aggregation aggregation, const EnsembleTrainConfig& config,
                             const std::function<void(int, double, double)>& on_epoch) {
  if (bank.selected.empty()) throw StageDependency("train_ensemble: view bank has no selection");
  int m_views = int(bank.selected.size());

  EnsembleModel model;
  model.backbone = config.from_scratch
                       ? SpnetModel::init(backbone_init.classes, config.seed,
                                          config.dropout_rate, backbone_init.fc1_width)
                       : backbone_init;
  model.backbone.dropout_rate = config.dropout_rate;
  model.rotations = bank.rotations;
  model.view_indices = bank.selected;
  model.view_weights.assign(size_t(m_views), double(float(1.0 / double(m_views))));
  model.aggregation = aggregation;

  Rng rng(config.seed ^ 0x5bd1e995u);
  std::vector<int> order(static_cast<size_t>(object_count));
  std::iota(order.begin(), order.end(), 0);

  struct SampleGrad {
    Gradients grads;
    std::vector<double> w_grad;
    double loss{0};
    bool correct{false};
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng = rng.fork(uint64_t(epoch));
    epoch_rng.shuffle(order);
    double loss_sum = 0;
    int correct = 0;

    for (size_t start = 0; start < order.size(); start += size_t(config.batch_size)) {
      size_t stop = std::min(order.size(), start + size_t(config.batch_size));
      std::vector<SampleGrad> partial(stop - start);

      parallel_for(
          stop - start,
          [&](size_t bi) {
            int obj = order[start + bi];
            std::vector<DepthImage> views = selected_views_of(obj);
            int label = labels[size_t(obj)];
            SampleGrad& out = partial[bi];
            out.grads = Gradients::zeros_like(model.backbone);
            out.w_grad.assign(size_t(m_views), 0.0);

            // Dropout stream keyed by (epoch, object) so results do not
            // depend on the worker count.
            Rng drop_rng = Rng(config.seed).fork(uint64_t(epoch) * 1000003u + uint64_t(obj));

            std::vector<ForwardCache> caches(static_cast<size_t>(m_views));
            ScoreMatrix scores;
            scores.views = m_views;
            scores.classes = model.backbone.classes;
            scores.data.assign(size_t(m_views) * scores.classes, 0.0);
            for (int j = 0; j < m_views; ++j) {
              Tensor img = image_to_tensor(views[size_t(j)]);
              std::vector<double> s =
                  spnet_forward(model.backbone, img, true, &caches[size_t(j)], &drop_rng);
              std::copy(s.begin(), s.end(), scores.row(j));
            }

            std::vector<double> agg =
                aggregate(scores, aggregation,
                          aggregation == Aggregation::WeightedAverage ? model.view_weights
                                                                      : std::span<const double>{});
            auto [loss, d_agg] = softmax_cross_entropy(agg, label);
            out.loss = loss;
            out.correct = int(std::max_element(agg.begin(), agg.end()) - agg.begin()) == label;

            // Route the aggregate gradient to each view's scores.
            for (int j = 0; j < m_views; ++j) {
              std::vector<double> d_view(size_t(scores.classes), 0.0);
              switch (aggregation) {
                case Aggregation::MaxPool:
                  for (int c = 0; c < scores.classes; ++c) {
                    int arg = 0;
                    for (int k = 1; k < m_views; ++k)
                      if (scores.row(k)[c] > scores.row(arg)[c]) arg = k;
                    if (arg == j) d_view[size_t(c)] = d_agg[size_t(c)];
                  }
                  break;
                case Aggregation::AvgPool:
                  for (int c = 0; c < scores.classes; ++c)
                    d_view[size_t(c)] = d_agg[size_t(c)] / double(m_views);
                  break;
                case Aggregation::WeightedAverage: {
                  double w = model.view_weights[size_t(j)];
                  for (int c = 0; c < scores.classes; ++c) d_view[size_t(c)] = w * d_agg[size_t(c)];
                  double g = 0;
                  for (int c = 0; c < scores.classes; ++c)
                    g += scores.row(j)[c] * d_agg[size_t(c)];
                  out.w_grad[size_t(j)] = g;
                  break;
                }
              }
              spnet_backward(model.backbone, caches[size_t(j)], d_view, out.grads);
            }
          },
          config.workers);

      // Deterministic reduction in batch order.
      Gradients total = Gradients::zeros_like(model.backbone);
      std::vector<double> w_total(size_t(m_views), 0.0);
      for (const SampleGrad& s : partial) {
        total.accumulate(s.grads);
        for (int j = 0; j < m_views; ++j) w_total[size_t(j)] += s.w_grad[size_t(j)];
        loss_sum += s.loss;
        correct += s.correct ? 1 : 0;
      }
      double inv = 1.0 / double(stop - start);
      total.scale(inv);
      sgd_step(model.backbone, total, config.learning_rate);
      if (aggregation == Aggregation::WeightedAverage) {
        for (int j = 0; j < m_views; ++j)
          model.view_weights[size_t(j)] = double(
              float(model.view_weights[size_t(j)] - config.learning_rate * inv * w_total[size_t(j)]));
      }
    }

    if (on_epoch)
      on_epoch(epoch, loss_sum / double(object_count), double(correct) / double(object_count));
  }
  return model;
}

}  // namespace spnet
