#pragma once

#include <filesystem>
#include <optional>

#include "spnet/model.hpp"
#include "spnet/multiview.hpp"

namespace spnet {

/// Everything a stage writes to disk: the backbone, and after the selection
/// and ensemble stages the view bank and the learned ensemble head.
struct Checkpoint {
  SpnetModel model;
  std::optional<ViewBank> bank;
  Aggregation aggregation{Aggregation::WeightedAverage};
  std::vector<double> ensemble_weights;  // w* over the selected views; empty before ensembling
};

// SPNW container: magic "SPNW", version u16, class count u16, layer count
// u32, then per layer name (u16 length + bytes), rank u16, extents u32 each,
// f32 data. An optional "SPVB" section carries the view bank: N u32, M u32,
// rotations (azimuth, elevation f64) per view, weights f32 per view, selected
// indices u32 each, aggregation u8, ensemble weights f32 per selected view.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_spnw(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_spnw(std::istream& is);

}  // namespace spnet
