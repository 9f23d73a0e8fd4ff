#pragma once

#include <optional>
#include <vector>

#include "spnet/mesh.hpp"
#include "spnet/vec3.hpp"

namespace spnet {

struct Ray {
  Vec3 origin;
  Vec3 dir;
};

enum class HitRule { Farthest, Nearest };

/// Moller-Trumbore ray/triangle test. Returns the ray parameter t >= 0, or
/// nothing on miss. Triangles whose determinant magnitude falls below 1e-9
/// are treated as degenerate and skipped.
std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                         const Vec3& c);

/// Exhaustive caster; the oracle the accelerated path is checked against.
class BruteForceCaster {
 public:
  explicit BruteForceCaster(const TriangleMesh& mesh);
  std::optional<double> cast(const Ray& ray, HitRule rule = HitRule::Farthest) const;

 private:
  std::vector<Vec3> verts_;
  std::vector<std::array<int, 3>> faces_;
};

/// Median-split BVH over triangle centroids, at most 8 triangles per leaf.
/// Traversal visits every box the ray touches, so the reduction over hit
/// parameters is identical to the exhaustive caster.
class BvhCaster {
 public:
  explicit BvhCaster(const TriangleMesh& mesh);
  std::optional<double> cast(const Ray& ray, HitRule rule = HitRule::Farthest) const;

 private:
  struct Node {
    Vec3 bmin, bmax;
    int left{-1}, right{-1};
    int first{0}, count{0};  // leaf triangle range when count > 0
  };

  int build(std::vector<int>& order, int begin, int end, int depth);

  std::vector<Vec3> verts_;
  std::vector<std::array<int, 3>> faces_;  // reordered by build
  std::vector<Node> nodes_;
};

/// Radial distance of the outermost surface point in direction `dir` from the
/// origin; 0 when the ray misses.
double ray_cast(const TriangleMesh& mesh, const Vec3& dir);

}  // namespace spnet
