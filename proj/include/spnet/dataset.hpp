#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spnet/mesh.hpp"

namespace spnet {

struct ManifestRecord {
  std::string object_id;
  std::string mesh_path;  // relative to the manifest directory when not absolute
  std::string class_label;
  std::string split;  // train | val | test
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(const ManifestRecord& rec) const;
};

/// CSV with header object_id,mesh_path,class_label,split. Object ids must be
/// unique and every mesh path must exist.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Sorted unique class labels; the index in this list is the class id used
/// by models and metrics.
std::vector<std::string> class_names(const Manifest& manifest);
int class_index(const std::vector<std::string>& names, const std::string& label);

// Procedural shape generators (unit-scale, centered near the origin).
TriangleMesh make_box(double sx = 1.0, double sy = 1.0, double sz = 1.0);
TriangleMesh make_icosphere(int subdivisions = 2);
TriangleMesh make_cylinder(int segments = 24, double radius = 0.5, double height = 1.6);
TriangleMesh make_tetrahedron();
TriangleMesh make_torus(int major_segments = 24, int minor_segments = 12, double major_radius = 0.7,
                        double minor_radius = 0.3);

void write_off(const std::filesystem::path& path, const TriangleMesh& mesh);

struct SynthConfig {
  int count{30};           // total objects, divided evenly over the classes
  int classes{5};          // 1..5 shape families
  double train_fraction{0.75};
  uint64_t seed{42};
};

/// Deterministic labeled corpus: boxes, icospheres, cylinders, tetrahedra,
/// tori under per-axis scale (+-30%) and small vertex jitter. Writes OFF
/// files under out_dir/meshes plus out_dir/manifest.csv and returns the
/// manifest.
Manifest synthesize_dataset(const std::filesystem::path& out_dir, const SynthConfig& config);

}  // namespace spnet
