#include "spnet/depth_image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spnet/binio.hpp"
#include "spnet/errors.hpp"

namespace spnet {

namespace {
constexpr char kMagic[4] = {'S', 'P', 'D', 'I'};
constexpr uint16_t kVersion = 1;
}  // namespace

void write_spdi(std::ostream& os, const DepthImage& img) {
  write_bytes(os, kMagic, 4);
  write_u16(os, kVersion);
  write_u8(os, uint8_t(img.kind));
  write_u16(os, uint16_t(img.rows));
  write_u16(os, uint16_t(img.cols));
  write_f64(os, img.rotation.azimuth);
  write_f64(os, img.rotation.elevation);
  for (float p : img.pixels) write_f32(os, p);
}

DepthImage read_spdi(std::istream& is) {
  char magic[4];
  read_bytes(is, magic, 4, "SPDI magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an SPDI stream");
  uint16_t version = read_u16(is, "SPDI version");
  if (version != kVersion) throw IoError("unsupported SPDI version " + std::to_string(version));
  DepthImage img;
  img.kind = Projection(read_u8(is, "SPDI kind"));
  img.rows = read_u16(is, "SPDI rows");
  img.cols = read_u16(is, "SPDI cols");
  img.rotation.azimuth = read_f64(is, "SPDI azimuth");
  img.rotation.elevation = read_f64(is, "SPDI elevation");
  img.pixels.resize(size_t(img.rows) * img.cols);
  for (auto& p : img.pixels) p = read_f32(is, "SPDI pixels");
  return img;
}

void write_spdi_file(const std::filesystem::path& path, const DepthImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_spdi(out, img);
  if (!out) throw IoError("failed writing " + path.string());
}

DepthImage read_spdi_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_spdi(in);
}

namespace {

// CRC-32 (PNG flavor).
uint32_t crc32(const uint8_t* data, size_t n, uint32_t crc = 0xffffffffu) {
  static std::array<uint32_t, 256> table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  for (size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc;
}

void push_u32_be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v >> 24));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

void push_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& body) {
  push_u32_be(out, uint32_t(body.size()));
  size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), body.begin(), body.end());
  uint32_t crc = crc32(out.data() + start, out.size() - start) ^ 0xffffffffu;
  push_u32_be(out, crc);
}

// zlib stream with stored (type 0) deflate blocks. Compression is irrelevant
// for documentation images.
std::vector<uint8_t> zlib_stored(const std::vector<uint8_t>& raw) {
  std::vector<uint8_t> z;
  z.push_back(0x78);
  z.push_back(0x01);
  size_t pos = 0;
  do {
    size_t n = std::min<size_t>(raw.size() - pos, 65535);
    bool last = pos + n == raw.size();
    z.push_back(last ? 1 : 0);
    z.push_back(uint8_t(n & 0xff));
    z.push_back(uint8_t(n >> 8));
    z.push_back(uint8_t(~n & 0xff));
    z.push_back(uint8_t((~n >> 8) & 0xff));
    z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + n);
    pos += n;
  } while (pos < raw.size());
  uint32_t a = 1, b = 0;
  for (uint8_t byte : raw) {
    a = (a + byte) % 65521;
    b = (b + a) % 65521;
  }
  push_u32_be(z, (b << 16) | a);
  return z;
}

}  // namespace

void write_png16(const std::filesystem::path& path, const DepthImage& img) {
  std::vector<uint8_t> raw;
  raw.reserve(size_t(img.rows) * (1 + 2 * size_t(img.cols)));
  for (int r = 0; r < img.rows; ++r) {
    raw.push_back(0);  // filter: none
    for (int c = 0; c < img.cols; ++c) {
      double d = std::clamp(double(img.at(r, c)), 0.0, 1.0);
      auto v = uint16_t(std::lround(65535.0 * d));
      raw.push_back(uint8_t(v >> 8));
      raw.push_back(uint8_t(v & 0xff));
    }
  }

  std::vector<uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<uint8_t> ihdr;
  push_u32_be(ihdr, uint32_t(img.cols));
  push_u32_be(ihdr, uint32_t(img.rows));
  ihdr.push_back(16);  // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  push_chunk(png, "IHDR", ihdr);
  push_chunk(png, "IDAT", zlib_stored(raw));
  push_chunk(png, "IEND", {});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(png.data()), std::streamsize(png.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace spnet
