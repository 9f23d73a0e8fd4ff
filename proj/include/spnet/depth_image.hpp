#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "spnet/mesh.hpp"
#include "spnet/projection.hpp"

namespace spnet {

/// Single-channel radial depth raster. Rendered views are 128x128 with all
/// values in [0, 1]; the container itself supports any grid (it also carries
/// similarity matrices for visualization).
struct DepthImage {
  int rows{128};
  int cols{128};
  Projection kind{Projection::UV};
  Rotation rotation;
  std::string source_id;  // not serialized; derived from file layout
  std::vector<float> pixels;

  DepthImage() = default;
  DepthImage(int r, int c, Projection k) : rows(r), cols(c), kind(k), pixels(size_t(r) * c, 0.0f) {}

  float& at(int r, int c) { return pixels[size_t(r) * cols + c]; }
  float at(int r, int c) const { return pixels[size_t(r) * cols + c]; }
};

// SPDI container: magic "SPDI", version u16, kind u8, rows u16, cols u16,
// rotation azimuth/elevation as f64, then row-major f32 pixels. Little-endian.
void write_spdi(std::ostream& os, const DepthImage& img);
DepthImage read_spdi(std::istream& is);
void write_spdi_file(const std::filesystem::path& path, const DepthImage& img);
DepthImage read_spdi_file(const std::filesystem::path& path);

/// 16-bit grayscale PNG, value = round(65535 * clamp(depth, 0, 1)).
/// Documentation output only; uses stored (uncompressed) deflate blocks.
void write_png16(const std::filesystem::path& path, const DepthImage& img);

}  // namespace spnet
