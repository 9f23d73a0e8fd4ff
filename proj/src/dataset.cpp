#include "spnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "spnet/binio.hpp"
#include "spnet/errors.hpp"
#include "spnet/rng.hpp"

namespace spnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream iss(line);
  while (std::getline(iss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::filesystem::path Manifest::resolve(const ManifestRecord& rec) const {
  std::filesystem::path p(rec.mesh_path);
  return p.is_absolute() ? p : base_dir / p;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());

  Manifest m;
  m.base_dir = path.parent_path();

  std::string line;
  if (!std::getline(in, line)) throw IoError("manifest " + path.string() + " is empty");
  if (split_csv(line) != std::vector<std::string>{"object_id", "mesh_path", "class_label", "split"})
    throw IoError("manifest " + path.string() + ": unexpected header '" + line + "'");

  std::set<std::string> seen;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 4)
      throw IoError("manifest line " + std::to_string(number) + ": expected 4 fields");
    ManifestRecord rec{fields[0], fields[1], fields[2], fields[3]};
    if (rec.split != "train" && rec.split != "val" && rec.split != "test")
      throw IoError("manifest line " + std::to_string(number) + ": bad split '" + rec.split + "'");
    if (!seen.insert(rec.object_id).second)
      throw IoError("manifest line " + std::to_string(number) + ": duplicate object_id '" +
                    rec.object_id + "'");
    if (!std::filesystem::exists(m.resolve(rec)))
      throw IoError("manifest line " + std::to_string(number) + ": mesh path '" + rec.mesh_path +
                    "' does not exist");
    m.records.push_back(std::move(rec));
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "object_id,mesh_path,class_label,split\n";
  for (const auto& rec : manifest.records)
    out << rec.object_id << ',' << rec.mesh_path << ',' << rec.class_label << ',' << rec.split
        << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> class_names(const Manifest& manifest) {
  std::set<std::string> labels;
  for (const auto& rec : manifest.records) labels.insert(rec.class_label);
  return {labels.begin(), labels.end()};
}

int class_index(const std::vector<std::string>& names, const std::string& label) {
  auto it = std::lower_bound(names.begin(), names.end(), label);
  if (it == names.end() || *it != label)
    throw ConfigError("label '" + label + "' missing from the class list");
  return int(it - names.begin());
}

TriangleMesh make_box(double sx, double sy, double sz) {
  TriangleMesh m;
  double hx = sx / 2, hy = sy / 2, hz = sz / 2;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back({(i & 1) ? hx : -hx, (i & 2) ? hy : -hy, (i & 4) ? hz : -hz});
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

TriangleMesh make_icosphere(int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v = normalized(v);
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
             {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
             {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
             {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 v = normalized((m.vertices[size_t(a)] + m.vertices[size_t(b)]) * 0.5);
      m.vertices.push_back(v);
      int idx = int(m.vertices.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  return m;
}

TriangleMesh make_cylinder(int segments, double radius, double height) {
  TriangleMesh m;
  double hz = height / 2;
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), -hz});
    m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), hz});
  }
  int bottom_center = int(m.vertices.size());
  m.vertices.push_back({0, 0, -hz});
  int top_center = int(m.vertices.size());
  m.vertices.push_back({0, 0, hz});

  for (int i = 0; i < segments; ++i) {
    int j = (i + 1) % segments;
    int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    m.faces.push_back({b0, b1, t1});
    m.faces.push_back({b0, t1, t0});
    m.faces.push_back({bottom_center, b1, b0});
    m.faces.push_back({top_center, t0, t1});
  }
  return m;
}

TriangleMesh make_tetrahedron() {
  TriangleMesh m;
  m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return m;
}

TriangleMesh make_torus(int major_segments, int minor_segments, double major_radius,
                        double minor_radius) {
  TriangleMesh m;
  for (int i = 0; i < major_segments; ++i) {
    double u = 2.0 * kPi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      double v = 2.0 * kPi * j / minor_segments;
      double r = major_radius + minor_radius * std::cos(v);
      m.vertices.push_back({r * std::cos(u), r * std::sin(u), minor_radius * std::sin(v)});
    }
  }
  auto at = [&](int i, int j) {
    return (i % major_segments) * minor_segments + (j % minor_segments);
  };
  for (int i = 0; i < major_segments; ++i)
    for (int j = 0; j < minor_segments; ++j) {
      int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  return m;
}

void write_off(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << '\n';
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Manifest synthesize_dataset(const std::filesystem::path& out_dir, const SynthConfig& config) {
  if (config.classes < 1 || config.classes > 5)
    throw ConfigError("synth supports 1..5 classes, got " + std::to_string(config.classes));
  if (config.count < config.classes) throw ConfigError("synth count smaller than class count");

  const char* names[5] = {"box", "sphere", "cylinder", "tetra", "torus"};
  std::filesystem::path mesh_dir = out_dir / "meshes";
  std::filesystem::create_directories(mesh_dir);

  Manifest manifest;
  manifest.base_dir = out_dir;

  int per_class = config.count / config.classes;
  Rng rng(config.seed);
  for (int c = 0; c < config.classes; ++c) {
    int n_train = int(std::lround(per_class * config.train_fraction));
    for (int k = 0; k < per_class; ++k) {
      Rng obj_rng = rng.fork(uint64_t(c) * 100000u + uint64_t(k));
      TriangleMesh mesh;
      switch (c) {
        case 0: mesh = make_box(); break;
        case 1: mesh = make_icosphere(2); break;
        case 2: mesh = make_cylinder(); break;
        case 3: mesh = make_tetrahedron(); break;
        default: mesh = make_torus(); break;
      }
      // Per-axis scale +-30%, then small vertex jitter.
      double sx = obj_rng.uniform(0.7, 1.3);
      double sy = obj_rng.uniform(0.7, 1.3);
      double sz = obj_rng.uniform(0.7, 1.3);
      for (auto& v : mesh.vertices) {
        v.x = v.x * sx + obj_rng.uniform(-0.02, 0.02);
        v.y = v.y * sy + obj_rng.uniform(-0.02, 0.02);
        v.z = v.z * sz + obj_rng.uniform(-0.02, 0.02);
      }

      char id[64];
      std::snprintf(id, sizeof(id), "%s_%03d", names[c], k);
      std::string file = std::string(id) + ".off";
      write_off(mesh_dir / file, mesh);

      ManifestRecord rec;
      rec.object_id = id;
      rec.mesh_path = "meshes/" + file;
      rec.class_label = names[c];
      rec.split = k < n_train ? "train" : "test";
      manifest.records.push_back(std::move(rec));
    }
  }
  save_manifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace spnet
