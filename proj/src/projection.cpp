#include "spnet/projection.hpp"

#include <algorithm>
#include <cmath>

#include "spnet/errors.hpp"

namespace spnet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = kPi / 2.0;
constexpr double kTwoPi = 2.0 * kPi;

// Region tests tolerate this much slack so pixel centers that land exactly on
// the analytic boundary stay inside.
constexpr double kRegionEps = 1e-12;

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

// Kavrayskiy VII horizontal scale at latitude lat.
double kav_scale(double lat) { return 1.5 * std::sqrt(1.0 / 3.0 - (lat / kPi) * (lat / kPi)); }

// Eckert IV shared radical sqrt(4 - 3 sin|lat|), in [1, 2].
double eck_radical(double lat) { return std::sqrt(4.0 - 3.0 * std::sin(std::fabs(lat))); }

const double kEckVScale = std::sqrt(kTwoPi / 3.0);
const double kEckUScale = 1.0 / std::sqrt(6.0 * kPi);

}  // namespace

const char* projection_name(Projection kind) {
  switch (kind) {
    case Projection::UV: return "uv";
    case Projection::KavrayskiyVII: return "kavrayskiy7";
    case Projection::EckertIV: return "eckert4";
    case Projection::Cassini: return "cassini";
    case Projection::DepthMapYZ: return "depthmap_yz";
    case Projection::PanoramaZ: return "panorama_z";
    case Projection::Grid: return "grid";
  }
  return "unknown";
}

Projection projection_from_name(const std::string& name) {
  for (Projection kind : {Projection::UV, Projection::KavrayskiyVII, Projection::EckertIV,
                          Projection::Cassini, Projection::DepthMapYZ, Projection::PanoramaZ,
                          Projection::Grid}) {
    if (name == projection_name(kind)) return kind;
  }
  throw ConfigError("unknown projection '" + name + "'");
}

bool is_sphere_projection(Projection kind) {
  return kind == Projection::UV || kind == Projection::KavrayskiyVII ||
         kind == Projection::EckertIV || kind == Projection::Cassini;
}

SphereCoord spherical_coords(const Vec3& dir) {
  double n = norm(dir);
  if (std::fabs(n - 1.0) > 1e-6)
    throw NotUnit("direction norm " + std::to_string(n) + " deviates from 1");
  double z = std::clamp(dir.z, -1.0, 1.0);
  return {std::atan2(dir.x, dir.y), std::asin(z)};
}

Vec3 to_direction(const SphereCoord& c) {
  double cl = std::cos(c.lat);
  return {cl * std::sin(c.lon), cl * std::cos(c.lon), std::sin(c.lat)};
}

PlaneCoord project(Projection kind, const SphereCoord& c) {
  switch (kind) {
    case Projection::UV:
      return {0.5 + c.lon / kTwoPi, 0.5 - c.lat / kPi};
    case Projection::KavrayskiyVII:
      return {c.lon * kav_scale(c.lat), c.lat};
    case Projection::EckertIV: {
      double s = eck_radical(c.lat);
      // The v formula is even in latitude; the sign is carried explicitly so
      // the two hemispheres stay distinct and the map stays invertible.
      return {2.0 * c.lon * s * kEckUScale, sgn(c.lat) * kEckVScale * (2.0 - s)};
    }
    case Projection::Cassini: {
      if (std::fabs(std::fabs(c.lat) - kHalfPi) < 1e-15)
        return {0.0, sgn(c.lat) * kHalfPi};
      return {2.0 * std::asin(std::clamp(std::cos(c.lat) * std::sin(c.lon), -1.0, 1.0)),
              std::atan2(std::tan(c.lat), std::cos(c.lon))};
    }
    default:
      throw Error("project: not a sphere projection");
  }
}

SphereCoord unproject(Projection kind, const PlaneCoord& p) {
  if (!in_region(kind, p))
    throw OutOfRegion("plane point (" + std::to_string(p.u) + ", " + std::to_string(p.v) +
                      ") outside " + projection_name(kind) + " image");
  switch (kind) {
    case Projection::UV:
      return {kTwoPi * (p.u - 0.5), kPi * (0.5 - p.v)};
    case Projection::KavrayskiyVII:
      return {p.u / kav_scale(p.v), p.v};
    case Projection::EckertIV: {
      double s = 2.0 - std::fabs(p.v) / kEckVScale;
      double sin_abs_lat = std::clamp((4.0 - s * s) / 3.0, 0.0, 1.0);
      double lat = sgn(p.v) * std::asin(sin_abs_lat);
      return {p.u / (2.0 * s * kEckUScale), lat};
    }
    case Projection::Cassini: {
      double x = p.u / 2.0;
      double lat = std::asin(std::clamp(std::sin(p.v) * std::cos(x), -1.0, 1.0));
      double lon = std::atan2(std::tan(x), std::cos(p.v));
      return {lon, lat};
    }
    default:
      throw Error("unproject: not a sphere projection");
  }
}

PlaneBounds plane_bounds(Projection kind) {
  switch (kind) {
    case Projection::UV:
      return {0.0, 1.0, 0.0, 1.0};
    case Projection::KavrayskiyVII: {
      double umax = kPi * kav_scale(0.0);
      return {-umax, umax, -kHalfPi, kHalfPi};
    }
    case Projection::EckertIV: {
      double umax = 2.0 * kPi * 2.0 * kEckUScale;  // radical equals 2 at the equator
      return {-umax, umax, -kEckVScale, kEckVScale};
    }
    case Projection::Cassini:
      return {-kPi, kPi, -kHalfPi, kHalfPi};
    case Projection::DepthMapYZ:
      return {-1.0, 1.0, -1.0, 1.0};
    case Projection::PanoramaZ:
      return {-kPi, kPi, -1.0, 1.0};
    default:
      throw Error("plane_bounds: no raster window for this kind");
  }
}

bool in_region(Projection kind, const PlaneCoord& p) {
  // The Cassini image of the full sphere spans v in (-pi, pi]; the raster
  // window keeps the front hemisphere but the analytic inverse is valid on
  // the whole image.
  if (kind == Projection::Cassini)
    return std::fabs(p.u) <= kPi + kRegionEps && std::fabs(p.v) <= kPi + kRegionEps;

  PlaneBounds b = plane_bounds(kind);
  if (p.u < b.umin - kRegionEps || p.u > b.umax + kRegionEps || p.v < b.vmin - kRegionEps ||
      p.v > b.vmax + kRegionEps)
    return false;
  switch (kind) {
    case Projection::KavrayskiyVII:
      return std::fabs(p.u) <= kPi * kav_scale(p.v) + kRegionEps;
    case Projection::EckertIV: {
      double s = 2.0 - std::fabs(p.v) / kEckVScale;
      if (s < 1.0 - kRegionEps || s > 2.0 + kRegionEps) return false;
      return std::fabs(p.u) <= 2.0 * kPi * s * kEckUScale + kRegionEps;
    }
    default:
      return true;  // UV and the baselines fill their full window
  }
}

PlaneCoord pixel_to_plane(Projection kind, int row, int col, int rows, int cols) {
  PlaneBounds b = plane_bounds(kind);
  return {b.umin + (double(col) + 0.5) * (b.umax - b.umin) / double(cols),
          b.vmin + (double(row) + 0.5) * (b.vmax - b.vmin) / double(rows)};
}

std::pair<int, int> plane_to_pixel(Projection kind, const PlaneCoord& p, int rows, int cols) {
  PlaneBounds b = plane_bounds(kind);
  int col = int(std::floor((p.u - b.umin) / (b.umax - b.umin) * double(cols)));
  int row = int(std::floor((p.v - b.vmin) / (b.vmax - b.vmin) * double(rows)));
  return {std::clamp(row, 0, rows - 1), std::clamp(col, 0, cols - 1)};
}

}  // namespace spnet
