#pragma once

#include <filesystem>
#include <string>

#include "spnet/multiview.hpp"
#include "spnet/projection.hpp"
#include "spnet/raycast.hpp"
#include "spnet/retrieval.hpp"
#include "spnet/train.hpp"

namespace spnet {

/// Every knob a pipeline run reads. Defaults reproduce the recommended
/// configuration: UV projection, 64-view bank, top 5 views, learned weighted
/// average, SGD at 0.01.
struct RunConfig {
  Projection projection{Projection::UV};
  int image_size{128};
  std::string view_preset{"plain"};
  int num_views{64};
  int top_m{5};
  Aggregation aggregation{Aggregation::WeightedAverage};
  DistanceMetric metric{DistanceMetric::L1};
  HitRule hit_rule{HitRule::Farthest};
  CenterMode center_mode{CenterMode::BoundingBox};
  bool ensemble_from_scratch{false};
  int selection_epochs{40};
  int ensemble_epochs{8};
  TrainConfig train;
  int workers{0};
};

/// Applies one key=value setting. Throws ConfigError for unknown keys or
/// unparseable values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Line-based key=value file; blank lines and '#' comments ignored.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace spnet
