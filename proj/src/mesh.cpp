#include "spnet/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spnet/errors.hpp"

namespace spnet {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w;
}

// Splits text into lines, dropping blank lines and '#' comments, and keeps
// 1-based source line numbers for error messages.
struct LineReader {
  std::vector<std::pair<int, std::string>> lines;

  explicit LineReader(std::string_view text) {
    int number = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
      size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++number;
      std::string_view line = text.substr(pos, end - pos);
      size_t hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      size_t first = line.find_first_not_of(" \t\r");
      if (first != std::string_view::npos) {
        size_t last = line.find_last_not_of(" \t\r");
        lines.emplace_back(number, std::string(line.substr(first, last - first + 1)));
      }
      pos = end + 1;
      if (end == text.size()) break;
    }
  }
};

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MalformedHeader("line " + std::to_string(line) + ": expected a number, got '" + tok + "'");
  }
}

long parse_long(const std::string& tok, int line, const char* what) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw MalformedHeader("line " + std::to_string(line) + ": expected " + what + ", got '" + tok + "'");
  return v;
}

void append_fan(TriangleMesh& mesh, const std::vector<int>& poly) {
  for (size_t k = 1; k + 1 < poly.size(); ++k)
    mesh.faces.push_back({poly[0], poly[int(k)], poly[int(k) + 1]});
}

}  // namespace

Rotation::Rotation(double az, double el) : azimuth(wrap_angle(az)), elevation(wrap_angle(el)) {}

Mat3 rotation_matrix(const Rotation& r) {
  return Mat3::rotation_y(r.elevation) * Mat3::rotation_z(r.azimuth);
}

TriangleMesh parse_off(std::string_view text) {
  LineReader reader(text);
  const auto& lines = reader.lines;
  if (lines.empty()) throw MalformedHeader("line 1: empty OFF input");

  size_t cursor = 0;
  std::vector<std::string> counts;
  const auto& [header_line, header] = lines[cursor];
  if (header == "OFF") {
    ++cursor;
    if (cursor >= lines.size())
      throw MalformedHeader("line " + std::to_string(header_line) + ": missing count line after OFF");
    counts = split_tokens(lines[cursor].second);
    ++cursor;
  } else if (header.rfind("OFF", 0) == 0) {
    // Dataset quirk: counts glued onto the header token.
    counts = split_tokens(header.substr(3));
    ++cursor;
  } else {
    throw MalformedHeader("line " + std::to_string(header_line) + ": expected OFF header, got '" +
                          header + "'");
  }

  int count_line = lines[cursor - 1].first;
  if (counts.size() < 2)
    throw MalformedHeader("line " + std::to_string(count_line) + ": expected vertex/face counts");
  long nv = parse_long(counts[0], count_line, "vertex count");
  long nf = parse_long(counts[1], count_line, "face count");
  if (nv <= 0 || nf <= 0)
    throw EmptyMesh("line " + std::to_string(count_line) + ": mesh declares " + std::to_string(nv) +
                    " vertices and " + std::to_string(nf) + " faces");

  TriangleMesh mesh;
  mesh.vertices.reserve(size_t(nv));
  for (long i = 0; i < nv; ++i, ++cursor) {
    if (cursor >= lines.size()) throw MalformedHeader("line " + std::to_string(lines.back().first) +
                                                      ": truncated vertex list");
    const auto& [ln, body] = lines[cursor];
    auto toks = split_tokens(body);
    if (toks.size() < 3) throw MalformedHeader("line " + std::to_string(ln) + ": vertex needs 3 coordinates");
    mesh.vertices.push_back({parse_double(toks[0], ln), parse_double(toks[1], ln), parse_double(toks[2], ln)});
  }

  for (long i = 0; i < nf; ++i, ++cursor) {
    if (cursor >= lines.size()) throw MalformedHeader("line " + std::to_string(lines.back().first) +
                                                      ": truncated face list");
    const auto& [ln, body] = lines[cursor];
    auto toks = split_tokens(body);
    if (toks.empty()) throw MalformedFace("line " + std::to_string(ln) + ": empty face record");
    long arity = parse_long(toks[0], ln, "face arity");
    if (arity < 3 || toks.size() < size_t(arity) + 1)
      throw MalformedFace("line " + std::to_string(ln) + ": face needs at least 3 indices");
    std::vector<int> poly;
    poly.reserve(size_t(arity));
    for (long k = 0; k < arity; ++k) {
      long idx = parse_long(toks[size_t(k) + 1], ln, "face index");
      if (idx < 0 || idx >= nv)
        throw IndexOutOfRange("line " + std::to_string(ln) + ": face index " + std::to_string(idx) +
                              " out of range for " + std::to_string(nv) + " vertices");
      poly.push_back(int(idx));
    }
    append_fan(mesh, poly);
  }
  return mesh;
}

TriangleMesh parse_obj(std::string_view text) {
  LineReader reader(text);
  TriangleMesh mesh;
  for (const auto& [ln, body] : reader.lines) {
    auto toks = split_tokens(body);
    if (toks.empty()) continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) throw MalformedHeader("line " + std::to_string(ln) + ": vertex needs 3 coordinates");
      mesh.vertices.push_back({parse_double(toks[1], ln), parse_double(toks[2], ln), parse_double(toks[3], ln)});
    } else if (toks[0] == "f") {
      if (toks.size() < 4)
        throw MalformedFace("line " + std::to_string(ln) + ": face needs at least 3 indices");
      std::vector<int> poly;
      poly.reserve(toks.size() - 1);
      long nv = long(mesh.vertices.size());
      for (size_t k = 1; k < toks.size(); ++k) {
        std::string head = toks[k].substr(0, toks[k].find('/'));
        long idx = parse_long(head, ln, "face index");
        if (idx < 0) idx = nv + idx;  // -1 refers to the last vertex so far
        else if (idx == 0) throw IndexOutOfRange("line " + std::to_string(ln) + ": face index 0 is invalid");
        else idx -= 1;
        if (idx < 0 || idx >= nv)
          throw IndexOutOfRange("line " + std::to_string(ln) + ": face index " + toks[k] +
                                " out of range for " + std::to_string(nv) + " vertices");
        poly.push_back(int(idx));
      }
      append_fan(mesh, poly);
    }
  }
  if (mesh.vertices.empty() || mesh.faces.empty()) throw EmptyMesh("OBJ input has no usable v/f records");
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  TriangleMesh mesh;
  if (ext == ".off") mesh = parse_off(ss.str());
  else if (ext == ".obj") mesh = parse_obj(ss.str());
  else throw IoError("unsupported mesh extension '" + ext + "' for " + path.string());
  mesh.id = path.stem().string();
  return mesh;
}

Vec3 centroid(const TriangleMesh& mesh, CenterMode mode) {
  if (mesh.vertices.empty()) throw EmptyMesh("centroid of mesh without vertices");
  if (mode == CenterMode::VertexMean) {
    Vec3 sum{};
    for (const auto& v : mesh.vertices) sum += v;
    return sum * (1.0 / double(mesh.vertices.size()));
  }
  Vec3 lo = mesh.vertices.front(), hi = mesh.vertices.front();
  for (const auto& v : mesh.vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    lo.z = std::min(lo.z, v.z);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
    hi.z = std::max(hi.z, v.z);
  }
  return (lo + hi) * 0.5;
}

TriangleMesh normalize(TriangleMesh mesh, CenterMode mode) {
  Vec3 c = centroid(mesh, mode);
  double max_norm = 0;
  for (auto& v : mesh.vertices) {
    v = v - c;
    max_norm = std::max(max_norm, norm(v));
  }
  if (max_norm < 1e-12) throw DegenerateMesh("all vertices coincide, cannot normalize");
  double s = 1.0 / max_norm;
  for (auto& v : mesh.vertices) v = v * s;
  return mesh;
}

TriangleMesh rotate(TriangleMesh mesh, const Rotation& r) {
  Mat3 R = rotation_matrix(r);
  for (auto& v : mesh.vertices) v = R * v;
  return mesh;
}

}  // namespace spnet
