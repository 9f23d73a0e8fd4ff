#pragma once

#include "spnet/depth_image.hpp"
#include "spnet/mesh.hpp"
#include "spnet/raycast.hpp"

namespace spnet {

/// Renders one view of a normalized mesh by per-pixel ray casting.
///
/// For the sphere projections each in-region pixel center is unprojected to a
/// direction and cast from the origin; the pixel takes the chosen hit's ray
/// parameter (0 on miss). DepthMapYZ casts an orthographic bundle along -x,
/// PanoramaZ a horizontal fan around the z axis.
///
/// The view rotation is applied to the rays (R^T d) rather than the vertices,
/// which is the same transform with a single acceleration structure per mesh.
class Renderer {
 public:
  explicit Renderer(const TriangleMesh& mesh, HitRule rule = HitRule::Farthest);

  DepthImage render(Projection kind, const Rotation& rotation, int size = 128) const;

  const BvhCaster& caster() const { return caster_; }

 private:
  BvhCaster caster_;
  HitRule rule_;
  std::string source_id_;
};

/// One-shot convenience wrapper.
DepthImage render(const TriangleMesh& mesh, Projection kind, const Rotation& rotation,
                  int size = 128, HitRule rule = HitRule::Farthest);

}  // namespace spnet
