#include "spnet/render.hpp"

#include <algorithm>
#include <cmath>

#include "spnet/errors.hpp"

namespace spnet {

Renderer::Renderer(const TriangleMesh& mesh, HitRule rule)
    : caster_(mesh), rule_(rule), source_id_(mesh.id) {
  if (mesh.vertices.empty() || mesh.faces.empty())
    throw EmptyMesh("cannot render mesh '" + mesh.id + "' without geometry");
}

DepthImage Renderer::render(Projection kind, const Rotation& rotation, int size) const {
  DepthImage img(size, size, kind);
  img.rotation = rotation;
  img.source_id = source_id_;
  // Casting against the rotated mesh equals casting R^T rays against the
  // original one.
  Mat3 inv = rotation_matrix(rotation).transpose();

  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      PlaneCoord p = pixel_to_plane(kind, r, c, size, size);
      Ray ray;
      HitRule rule = rule_;
      double scale = 1.0;  // pixel = scale applied to the hit parameter
      double bias = 0.0;
      switch (kind) {
        case Projection::UV:
        case Projection::KavrayskiyVII:
        case Projection::EckertIV:
        case Projection::Cassini: {
          if (!in_region(kind, p)) continue;
          ray = {{0, 0, 0}, to_direction(unproject(kind, p))};
          break;
        }
        case Projection::DepthMapYZ: {
          // Viewer on +x; first hit along -x. Depth stored as (1 + x_hit) / 2
          // so the range stays inside [0, 1].
          ray = {{2.0, p.u, p.v}, {-1.0, 0.0, 0.0}};
          rule = HitRule::Nearest;
          scale = -0.5;
          bias = 1.5;  // (1 + (2 - t)) / 2
          break;
        }
        case Projection::PanoramaZ: {
          ray = {{0.0, 0.0, p.v}, {std::sin(p.u), std::cos(p.u), 0.0}};
          break;
        }
        default:
          throw Error("render: unsupported kind");
      }
      ray.origin = inv * ray.origin;
      ray.dir = inv * ray.dir;
      auto t = caster_.cast(ray, rule);
      if (t) img.at(r, c) = float(std::clamp(bias + scale * *t, 0.0, 1.0));
    }
  }
  return img;
}

DepthImage render(const TriangleMesh& mesh, Projection kind, const Rotation& rotation, int size,
                  HitRule rule) {
  return Renderer(mesh, rule).render(kind, rotation, size);
}

}  // namespace spnet
