#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "spnet/errors.hpp"

namespace spnet {

// Little-endian binary IO, independent of host byte order.

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), std::streamsize(n));
}

inline void write_u8(std::ostream& os, uint8_t v) { write_bytes(os, &v, 1); }

inline void write_u16(std::ostream& os, uint16_t v) {
  uint8_t b[2] = {uint8_t(v & 0xff), uint8_t(v >> 8)};
  write_bytes(os, b, 2);
}

inline void write_u32(std::ostream& os, uint32_t v) {
  uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = uint8_t(v >> (8 * i));
  write_bytes(os, b, 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
  write_bytes(os, b, 8);
}

inline void write_f32(std::ostream& os, float v) { write_u32(os, std::bit_cast<uint32_t>(v)); }
inline void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<uint64_t>(v)); }

inline void read_bytes(std::istream& is, void* p, size_t n, const char* what) {
  is.read(static_cast<char*>(p), std::streamsize(n));
  if (size_t(is.gcount()) != n) throw IoError(std::string("truncated input while reading ") + what);
}

inline uint8_t read_u8(std::istream& is, const char* what = "u8") {
  uint8_t v;
  read_bytes(is, &v, 1, what);
  return v;
}

inline uint16_t read_u16(std::istream& is, const char* what = "u16") {
  uint8_t b[2];
  read_bytes(is, b, 2, what);
  return uint16_t(b[0] | (uint16_t(b[1]) << 8));
}

inline uint32_t read_u32(std::istream& is, const char* what = "u32") {
  uint8_t b[4];
  read_bytes(is, b, 4, what);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
  return v;
}

inline uint64_t read_u64(std::istream& is, const char* what = "u64") {
  uint8_t b[8];
  read_bytes(is, b, 8, what);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}

inline float read_f32(std::istream& is, const char* what = "f32") {
  return std::bit_cast<float>(read_u32(is, what));
}

inline double read_f64(std::istream& is, const char* what = "f64") {
  return std::bit_cast<double>(read_u64(is, what));
}

/// Shortest round-trip decimal text for a double. Used everywhere a real
/// number lands in a text artifact so byte-level determinism holds.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace spnet
