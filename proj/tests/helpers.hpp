#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spnet/dataset.hpp"
#include "spnet/mesh.hpp"
#include "spnet/rng.hpp"

namespace spnet::testing {

inline constexpr double kPi = 3.14159265358979323846;

/// Random triangle soup inside the unit ball; exercises degenerate-ish
/// geometry the casters must agree on.
inline TriangleMesh random_soup(int triangles, uint64_t seed) {
  Rng rng(seed);
  TriangleMesh m;
  for (int i = 0; i < triangles; ++i) {
    for (int k = 0; k < 3; ++k)
      m.vertices.push_back(
          {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)});
    m.faces.push_back({3 * i, 3 * i + 1, 3 * i + 2});
  }
  m.id = "soup";
  return m;
}

inline Vec3 random_unit(Rng& rng) {
  for (;;) {
    Vec3 v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    double n = norm(v);
    if (n > 1e-3 && n <= 1.0) return v * (1.0 / n);
  }
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace spnet::testing
