#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spnet/depth_image.hpp"
#include "spnet/model.hpp"
#include "spnet/render.hpp"

namespace spnet {

/// The rotation set one object is rendered under, the learned per-view
/// weights (the 1x1 convolution kernel across views) and the retained views.
struct ViewBank {
  std::vector<Rotation> rotations;
  std::vector<double> weights;   // length N
  std::vector<int> selected;     // unique indices, sorted by descending |weight|
};

/// 8 azimuth x 8 elevation steps of 45 degrees, row-major by (elevation,
/// azimuth); index 0 is the identity rotation.
std::vector<Rotation> rotation_grid(int azimuth_steps = 8, int elevation_steps = 8);

enum class ViewPreset { Plain, MajorAxes, Mvcnn12, Bank64, Selected };

ViewPreset preset_from_name(const std::string& name);
const char* preset_name(ViewPreset preset);

/// The rotations a preset renders. Selected requires a bank and returns the
/// bank rotations at the selected indices.
std::vector<Rotation> preset_rotations(ViewPreset preset, const ViewBank* bank = nullptr);

/// Renders the mesh under every rotation (views computed concurrently).
std::vector<DepthImage> generate_views(const TriangleMesh& mesh, Projection kind,
                                       const std::vector<Rotation>& rotations, int size = 128,
                                       HitRule rule = HitRule::Farthest, int workers = 0);

/// Row-major N x C score matrix.
struct ScoreMatrix {
  int views{0};
  int classes{0};
  std::vector<double> data;

  double* row(int j) { return data.data() + size_t(j) * classes; }
  const double* row(int j) const { return data.data() + size_t(j) * classes; }
};

/// Runs the backbone on every view at inference settings.
ScoreMatrix view_scores(const SpnetModel& model, const std::vector<DepthImage>& views,
                        int workers = 0);

enum class Aggregation { MaxPool, AvgPool, WeightedAverage };

Aggregation aggregation_from_name(const std::string& name);
const char* aggregation_name(Aggregation agg);

/// Per-class reduction over views: max, mean, or weighted sum. AvgPool runs
/// through the weighted path with uniform weights so the two coincide
/// bit-for-bit. Throws EmptyViews on an empty matrix.
std::vector<double> aggregate(const ScoreMatrix& scores, Aggregation agg,
                              std::span<const double> weights = {});

/// Indices of the M largest |weight| entries, ties to the lower index,
/// ordered by descending |weight|.
std::vector<int> select_top(const ViewBank& bank, int top_m);

struct SelectionConfig {
  double learning_rate{0.01};
  int epochs{40};
  int batch_size{16};
  uint64_t seed{42};
};

/// Learns the per-view weights on frozen backbone scores: SGD on the
/// cross-entropy of the weighted-average prediction. Weights start at 1/N.
std::vector<double> train_view_weights(const std::vector<ScoreMatrix>& objects,
                                       const std::vector<int>& labels,
                                       const SelectionConfig& config);

/// View-selection stage: scores every object's views with the frozen
/// backbone (views supplied per object), trains the 1x1 weights and returns
/// the bank with `selected` = top_m indices.
ViewBank train_view_selection(const SpnetModel& backbone,
                              const std::function<std::vector<DepthImage>(int)>& views_of,
                              const std::vector<int>& labels, int object_count,
                              const std::vector<Rotation>& rotations, int top_m,
                              const SelectionConfig& config, int workers = 0);

struct EnsembleModel {
  SpnetModel backbone;
  std::vector<Rotation> rotations;    // bank rotations
  std::vector<int> view_indices;      // selected views, bank order
  std::vector<double> view_weights;   // w*, one per selected view
  Aggregation aggregation{Aggregation::WeightedAverage};
};

struct EnsembleTrainConfig {
  double learning_rate{0.01};
  int epochs{10};
  int batch_size{8};
  uint64_t seed{42};
  bool from_scratch{false};
  double dropout_rate{0.2};
  int workers{0};
};

/// Trains backbone and (for WeightedAverage) the ensemble weights end-to-end
/// on the aggregated prediction over each object's selected views.
EnsembleModel train_ensemble(const SpnetModel& backbone_init, const ViewBank& bank,
                             const std::function<std::vector<DepthImage>(int)>& selected_views_of,
                             const std::vector<int>& labels, int object_count,
                             Aggregation aggregation, const EnsembleTrainConfig& config,
                             const std::function<void(int, double, double)>& on_epoch = {});

/// Aggregated scores for one object's selected views.
std::vector<double> ensemble_scores(const EnsembleModel& model,
                                    const std::vector<DepthImage>& selected_views, int workers = 0);

/// Gradient of the cross-entropy of the weighted aggregate with respect to
/// the view weights; used by training and the finite-difference checks.
std::vector<double> weighted_aggregate_weight_grad(const ScoreMatrix& scores,
                                                   std::span<const double> weights, int label);

}  // namespace spnet
