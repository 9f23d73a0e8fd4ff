#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spnet/vec3.hpp"

namespace spnet {

/// Azimuth about the z (gravity) axis and elevation about the y axis,
/// both wrapped into [0, 2*pi).
struct Rotation {
  double azimuth{0};
  double elevation{0};

  Rotation() = default;
  Rotation(double az, double el);
};

/// Composition used everywhere a rotation is applied: R_y(elevation) * R_z(azimuth).
Mat3 rotation_matrix(const Rotation& r);

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::string id;
  std::string label;  // empty when unlabeled
};

/// ASCII OFF reader. Accepts the dataset variant where the counts share the
/// header line ("OFF3 1 0"). Non-triangle faces are fan-triangulated.
TriangleMesh parse_off(std::string_view text);

/// ASCII OBJ reader. Only `v` and `f` records are consumed; negative face
/// indices resolve relative to the vertices seen so far.
TriangleMesh parse_obj(std::string_view text);

/// Loads .off or .obj based on extension.
TriangleMesh load_mesh(const std::filesystem::path& path);

enum class CenterMode { BoundingBox, VertexMean };

Vec3 centroid(const TriangleMesh& mesh, CenterMode mode = CenterMode::BoundingBox);

/// Recenters on the centroid and scales so the farthest vertex sits on the
/// unit sphere. Throws DegenerateMesh when all vertices coincide.
TriangleMesh normalize(TriangleMesh mesh, CenterMode mode = CenterMode::BoundingBox);

/// Applies R_y(elevation) * R_z(azimuth) to every vertex.
TriangleMesh rotate(TriangleMesh mesh, const Rotation& r);

}  // namespace spnet
