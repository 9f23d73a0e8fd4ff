#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "spnet/vec3.hpp"

namespace spnet {

/// Longitude in [-pi, pi], latitude in [-pi/2, pi/2].
struct SphereCoord {
  double lon{0};
  double lat{0};
};

/// Projection-native plane coordinates.
struct PlaneCoord {
  double u{0};
  double v{0};
};

enum class Projection : uint8_t {
  UV = 0,
  KavrayskiyVII = 1,
  EckertIV = 2,
  Cassini = 3,
  DepthMapYZ = 4,
  PanoramaZ = 5,
  Grid = 255,  // container-only kind for non-render payloads (e.g. similarity matrices)
};

const char* projection_name(Projection kind);
Projection projection_from_name(const std::string& name);

/// True for the four sphere-to-plane mappings with analytic inverses.
bool is_sphere_projection(Projection kind);

/// lon = atan2(x, y), lat = asin(z). Throws NotUnit when |dir| is off 1 by
/// more than 1e-6.
SphereCoord spherical_coords(const Vec3& dir);

/// Inverse of spherical_coords: (cos lat sin lon, cos lat cos lon, sin lat).
Vec3 to_direction(const SphereCoord& c);

/// Sphere-to-plane mapping. Only valid for the four sphere projections.
PlaneCoord project(Projection kind, const SphereCoord& c);

/// Plane-to-sphere inverse. Throws OutOfRegion outside the projection image.
SphereCoord unproject(Projection kind, const PlaneCoord& p);

/// Axis-aligned bounding box of the projection image, also used as the
/// raster window.
struct PlaneBounds {
  double umin, umax, vmin, vmax;
};

PlaneBounds plane_bounds(Projection kind);

/// True when p lies inside the projection image (interior test with a small
/// boundary tolerance).
bool in_region(Projection kind, const PlaneCoord& p);

/// Affine map from the raster grid to plane_bounds, sampling pixel centers.
PlaneCoord pixel_to_plane(Projection kind, int row, int col, int rows = 128, int cols = 128);

/// Inverse of pixel_to_plane onto the containing pixel.
std::pair<int, int> plane_to_pixel(Projection kind, const PlaneCoord& p, int rows = 128,
                                   int cols = 128);

}  // namespace spnet
