#include "spnet/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "spnet/binio.hpp"

namespace spnet {

namespace {
constexpr char kMagic[4] = {'S', 'P', 'N', 'W'};
constexpr char kBankMagic[4] = {'S', 'P', 'V', 'B'};
constexpr uint16_t kVersion = 1;
}  // namespace

void write_spnw(std::ostream& os, const Checkpoint& ckpt) {
  write_bytes(os, kMagic, 4);
  write_u16(os, kVersion);
  write_u16(os, uint16_t(ckpt.model.classes));

  uint32_t layers = 0;
  ckpt.model.for_each_param([&](const std::string&, const Tensor&) { ++layers; });
  write_u32(os, layers);

  ckpt.model.for_each_param([&](const std::string& name, const Tensor& t) {
    write_u16(os, uint16_t(name.size()));
    write_bytes(os, name.data(), name.size());
    write_u16(os, uint16_t(t.shape.size()));
    for (int e : t.shape) write_u32(os, uint32_t(e));
    for (double v : t.data) write_f32(os, float(v));
  });

  if (ckpt.bank) {
    const ViewBank& bank = *ckpt.bank;
    write_bytes(os, kBankMagic, 4);
    write_u32(os, uint32_t(bank.rotations.size()));
    write_u32(os, uint32_t(bank.selected.size()));
    for (const Rotation& r : bank.rotations) {
      write_f64(os, r.azimuth);
      write_f64(os, r.elevation);
    }
    for (double w : bank.weights) write_f32(os, float(w));
    for (int idx : bank.selected) write_u32(os, uint32_t(idx));
    write_u8(os, uint8_t(ckpt.aggregation));
    write_u32(os, uint32_t(ckpt.ensemble_weights.size()));
    for (double w : ckpt.ensemble_weights) write_f32(os, float(w));
  }
}

Checkpoint read_spnw(std::istream& is) {
  char magic[4];
  read_bytes(is, magic, 4, "SPNW magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an SPNW stream");
  uint16_t version = read_u16(is, "SPNW version");
  if (version != kVersion) throw IoError("unsupported SPNW version " + std::to_string(version));
  int classes = read_u16(is, "SPNW class count");
  uint32_t layers = read_u32(is, "SPNW layer count");

  struct Entry {
    std::string name;
    Tensor tensor;
  };
  std::vector<Entry> entries(layers);
  for (auto& e : entries) {
    uint16_t len = read_u16(is, "layer name length");
    e.name.resize(len);
    read_bytes(is, e.name.data(), len, "layer name");
    uint16_t rank = read_u16(is, "layer rank");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = int(read_u32(is, "layer extent"));
    e.tensor = Tensor(shape);
    for (auto& v : e.tensor.data) v = double(read_f32(is, "layer data"));
  }

  // Rebuild by name over a skeleton with matching widths.
  int fc1_width = 512;
  for (const auto& e : entries)
    if (e.name == "fc1_b") fc1_width = e.tensor.dim(0);

  Checkpoint ckpt;
  ckpt.model = SpnetModel::init(classes, 0, 0.2, fc1_width);
  bool matched = true;
  size_t cursor = 0;
  ckpt.model.for_each_param([&](const std::string& name, Tensor& t) {
    if (cursor >= entries.size()) {
      matched = false;
      return;
    }
    Entry& e = entries[cursor++];
    if (e.name != name || e.tensor.shape != t.shape) {
      matched = false;
      return;
    }
    t = std::move(e.tensor);
  });
  if (!matched || cursor != entries.size())
    throw IoError("SPNW layer list does not match the SPNet architecture");

  // Optional view bank section.
  char peek[4];
  is.read(peek, 4);
  if (is.gcount() == 4 && std::memcmp(peek, kBankMagic, 4) == 0) {
    ViewBank bank;
    uint32_t n = read_u32(is, "SPVB view count");
    uint32_t m = read_u32(is, "SPVB selected count");
    bank.rotations.resize(n);
    for (auto& r : bank.rotations) {
      r.azimuth = read_f64(is, "SPVB azimuth");
      r.elevation = read_f64(is, "SPVB elevation");
    }
    bank.weights.resize(n);
    for (auto& w : bank.weights) w = double(read_f32(is, "SPVB weight"));
    bank.selected.resize(m);
    for (auto& idx : bank.selected) idx = int(read_u32(is, "SPVB index"));
    ckpt.aggregation = Aggregation(read_u8(is, "SPVB aggregation"));
    uint32_t ew = read_u32(is, "SPVB ensemble weight count");
    ckpt.ensemble_weights.resize(ew);
    for (auto& w : ckpt.ensemble_weights) w = double(read_f32(is, "SPVB ensemble weight"));
    ckpt.bank = std::move(bank);
  } else if (is.gcount() != 0) {
    throw IoError("trailing bytes after SPNW layers");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_spnw(out, ckpt);
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_spnw(in);
}

}  // namespace spnet
