#include "spnet/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spnet {

namespace {

constexpr double kDetEps = 1e-9;

// Keeps grazing hits on box faces inside during traversal; only ever adds
// candidate triangles, never drops one.
constexpr double kBoxPad = 1e-7;

void merge_hit(std::optional<double>& best, double t, HitRule rule) {
  if (!best) {
    best = t;
    return;
  }
  if (rule == HitRule::Farthest ? t > *best : t < *best) best = t;
}

bool ray_hits_box(const Ray& ray, const Vec3& bmin, const Vec3& bmax) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
  const double d[3] = {ray.dir.x, ray.dir.y, ray.dir.z};
  const double lo[3] = {bmin.x, bmin.y, bmin.z};
  const double hi[3] = {bmax.x, bmax.y, bmax.z};
  for (int axis = 0; axis < 3; ++axis) {
    if (std::fabs(d[axis]) < 1e-300) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return false;
      continue;
    }
    double inv = 1.0 / d[axis];
    double ta = (lo[axis] - o[axis]) * inv;
    double tb = (hi[axis] - o[axis]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                         const Vec3& c) {
  Vec3 e1 = b - a;
  Vec3 e2 = c - a;
  Vec3 p = cross(ray.dir, e2);
  double det = dot(e1, p);
  if (std::fabs(det) < kDetEps) return std::nullopt;
  double inv_det = 1.0 / det;
  Vec3 s = ray.origin - a;
  double u = dot(s, p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  Vec3 q = cross(s, e1);
  double v = dot(ray.dir, q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  double t = dot(e2, q) * inv_det;
  if (t < 0.0) return std::nullopt;
  return t;
}

BruteForceCaster::BruteForceCaster(const TriangleMesh& mesh)
    : verts_(mesh.vertices), faces_(mesh.faces) {}

std::optional<double> BruteForceCaster::cast(const Ray& ray, HitRule rule) const {
  std::optional<double> best;
  for (const auto& f : faces_) {
    auto t = intersect_triangle(ray, verts_[size_t(f[0])], verts_[size_t(f[1])], verts_[size_t(f[2])]);
    if (t) merge_hit(best, *t, rule);
  }
  return best;
}

BvhCaster::BvhCaster(const TriangleMesh& mesh) : verts_(mesh.vertices) {
  if (mesh.faces.empty()) return;
  std::vector<int> order(mesh.faces.size());
  for (size_t i = 0; i < order.size(); ++i) order[int(i)] = int(i);
  faces_.reserve(mesh.faces.size());
  nodes_.reserve(2 * mesh.faces.size());

  // build() permutes `order`; faces_ is then filled leaf by leaf.
  std::vector<std::array<int, 3>> source = mesh.faces;
  std::vector<int> scratch = order;
  struct Builder {
    const std::vector<Vec3>& verts;
    const std::vector<std::array<int, 3>>& source;
    std::vector<std::array<int, 3>>& faces;
    std::vector<Node>& nodes;

    Vec3 centroid(int f) const {
      const auto& tri = source[size_t(f)];
      return (verts[size_t(tri[0])] + verts[size_t(tri[1])] + verts[size_t(tri[2])]) * (1.0 / 3.0);
    }

    int build(std::vector<int>& order, int begin, int end) {
      Node node;
      node.bmin = {1e300, 1e300, 1e300};
      node.bmax = {-1e300, -1e300, -1e300};
      for (int i = begin; i < end; ++i) {
        const auto& tri = source[size_t(order[size_t(i)])];
        for (int k = 0; k < 3; ++k) {
          const Vec3& v = verts[size_t(tri[size_t(k)])];
          node.bmin.x = std::min(node.bmin.x, v.x);
          node.bmin.y = std::min(node.bmin.y, v.y);
          node.bmin.z = std::min(node.bmin.z, v.z);
          node.bmax.x = std::max(node.bmax.x, v.x);
          node.bmax.y = std::max(node.bmax.y, v.y);
          node.bmax.z = std::max(node.bmax.z, v.z);
        }
      }
      node.bmin = node.bmin - Vec3{kBoxPad, kBoxPad, kBoxPad};
      node.bmax = node.bmax + Vec3{kBoxPad, kBoxPad, kBoxPad};

      int n = end - begin;
      if (n <= 8) {
        node.first = int(faces.size());
        node.count = n;
        for (int i = begin; i < end; ++i) faces.push_back(source[size_t(order[size_t(i)])]);
        nodes.push_back(node);
        return int(nodes.size()) - 1;
      }

      Vec3 extent = node.bmax - node.bmin;
      int axis = 0;
      if (extent.y > extent.x) axis = 1;
      if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;
      int mid = begin + n / 2;
      std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                       [&](int fa, int fb) {
                         Vec3 ca = centroid(fa), cb = centroid(fb);
                         double va = axis == 0 ? ca.x : axis == 1 ? ca.y : ca.z;
                         double vb = axis == 0 ? cb.x : axis == 1 ? cb.y : cb.z;
                         if (va != vb) return va < vb;
                         return fa < fb;  // total order keeps the build deterministic
                       });

      int left = build(order, begin, mid);
      int right = build(order, mid, end);
      node.left = left;
      node.right = right;
      nodes.push_back(node);
      return int(nodes.size()) - 1;
    }
  } builder{verts_, source, faces_, nodes_};
  builder.build(scratch, 0, int(scratch.size()));
}

std::optional<double> BvhCaster::cast(const Ray& ray, HitRule rule) const {
  if (nodes_.empty()) return std::nullopt;
  std::optional<double> best;
  int stack[64];
  int top = 0;
  stack[top++] = int(nodes_.size()) - 1;  // root is built last
  while (top > 0) {
    const Node& node = nodes_[size_t(stack[--top])];
    if (!ray_hits_box(ray, node.bmin, node.bmax)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const auto& f = faces_[size_t(i)];
        auto t = intersect_triangle(ray, verts_[size_t(f[0])], verts_[size_t(f[1])],
                                    verts_[size_t(f[2])]);
        if (t) merge_hit(best, *t, rule);
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

double ray_cast(const TriangleMesh& mesh, const Vec3& dir) {
  BruteForceCaster caster(mesh);
  auto t = caster.cast({{0, 0, 0}, dir}, HitRule::Farthest);
  return t ? *t : 0.0;
}

}  // namespace spnet
