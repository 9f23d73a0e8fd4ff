#include <doctest.h>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "spnet/dataset.hpp"
#include "spnet/multiview.hpp"
#include "spnet/render.hpp"

using namespace spnet;
using spnet::testing::kPi;

namespace {

TriangleMesh jittered_box(uint64_t seed) {
  TriangleMesh box = make_box(1.4, 0.9, 1.1);
  Rng rng(seed);
  for (auto& v : box.vertices) {
    v.x += rng.uniform(-0.03, 0.03);
    v.y += rng.uniform(-0.03, 0.03);
    v.z += rng.uniform(-0.03, 0.03);
  }
  return normalize(box);
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("icosphere renders to a constant-1 image") {
  TriangleMesh sphere = normalize(make_icosphere(3));
  DepthImage img = render(sphere, Projection::UV, Rotation{});
  REQUIRE(img.rows == 128);
  REQUIRE(img.cols == 128);
  for (float p : img.pixels) CHECK(std::fabs(double(p) - 1.0) < 5e-3);
}

TEST_CASE("pixel values stay in the unit interval") {
  TriangleMesh mesh = jittered_box(7);
  for (Projection kind : {Projection::UV, Projection::KavrayskiyVII, Projection::EckertIV,
                          Projection::Cassini, Projection::DepthMapYZ, Projection::PanoramaZ}) {
    DepthImage img = render(mesh, kind, Rotation(0.3, 0.2));
    for (float p : img.pixels) {
      CHECK(p >= 0.0f);
      CHECK(p <= 1.0f);
    }
  }
}

TEST_CASE("full-turn azimuth reproduces the identity view") {
  TriangleMesh mesh = jittered_box(11);
  DepthImage a = render(mesh, Projection::UV, Rotation{});
  DepthImage b = render(mesh, Projection::UV, Rotation(2 * kPi, 0));
  for (size_t i = 0; i < a.pixels.size(); ++i)
    CHECK(std::fabs(double(a.pixels[i]) - double(b.pixels[i])) < 1e-6);
}

TEST_CASE("45 degree azimuth shifts the UV image by 16 columns") {
  for (uint64_t seed : {21u, 22u}) {
    TriangleMesh mesh = jittered_box(seed);
    DepthImage base = render(mesh, Projection::UV, Rotation{});
    DepthImage turned = render(mesh, Projection::UV, Rotation(kPi / 4, 0));
    double max_diff = 0;
    for (int r = 0; r < 128; ++r)
      for (int c = 0; c < 128; ++c)
        max_diff = std::max(max_diff,
                            std::fabs(double(turned.at(r, c)) - double(base.at(r, (c + 16) % 128))));
    CHECK(max_diff < 1e-6);
  }
}

TEST_CASE("z-mirrored mesh renders the row-reversed UV image") {
  TriangleMesh mesh = jittered_box(33);
  TriangleMesh mirrored = mesh;
  for (auto& v : mirrored.vertices) v.z = -v.z;
  DepthImage a = render(mesh, Projection::UV, Rotation{});
  DepthImage b = render(mirrored, Projection::UV, Rotation{});
  for (int r = 0; r < 128; ++r)
    for (int c = 0; c < 128; ++c)
      CHECK(std::fabs(double(b.at(r, c)) - double(a.at(127 - r, c))) < 1e-6);
}

TEST_CASE("depth map of a cube") {
  TriangleMesh cube = normalize(make_box(2, 2, 2));
  DepthImage img = render(cube, Projection::DepthMapYZ, Rotation{});
  double h = 1.0 / std::sqrt(3.0);
  // Center pixel sees the +x face: value (1 + h) / 2.
  CHECK(double(img.at(64, 64)) == doctest::Approx((1.0 + h) / 2.0).epsilon(1e-6));
  // Far corner of the window misses the cube.
  CHECK(double(img.at(0, 0)) == 0.0);
}

TEST_CASE("panorama of a cube") {
  TriangleMesh cube = normalize(make_box(2, 2, 2));
  DepthImage img = render(cube, Projection::PanoramaZ, Rotation{});
  double h = 1.0 / std::sqrt(3.0);
  PlaneCoord p = pixel_to_plane(Projection::PanoramaZ, 64, 64);
  double expected = h / std::cos(p.u);  // fan ray hits the +y face
  CHECK(double(img.at(64, 64)) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("view generation is identical for any worker count") {
  TriangleMesh mesh = jittered_box(55);
  std::vector<Rotation> rotations = rotation_grid(4, 2);
  std::vector<DepthImage> serial = generate_views(mesh, Projection::UV, rotations, 128,
                                                  HitRule::Farthest, 1);
  std::vector<DepthImage> threaded = generate_views(mesh, Projection::UV, rotations, 128,
                                                    HitRule::Farthest, 2);
  REQUIRE(serial.size() == threaded.size());
  for (size_t j = 0; j < serial.size(); ++j)
    CHECK(serial[j].pixels == threaded[j].pixels);
}

TEST_CASE("spdi round trip is bit exact") {
  DepthImage img(16, 16, Projection::Cassini);
  img.rotation = Rotation(0.7, 1.9);
  Rng rng(77);
  for (auto& p : img.pixels) p = float(rng.uniform());

  auto dir = spnet::testing::temp_dir("spdi");
  write_spdi_file(dir / "img.spdi", img);
  DepthImage back = read_spdi_file(dir / "img.spdi");
  CHECK(back.rows == img.rows);
  CHECK(back.cols == img.cols);
  CHECK(back.kind == img.kind);
  CHECK(back.rotation.azimuth == img.rotation.azimuth);
  CHECK(back.rotation.elevation == img.rotation.elevation);
  CHECK(back.pixels == img.pixels);

  // Rendered image too.
  DepthImage rendered = render(jittered_box(78), Projection::UV, Rotation(0.4, 0.1));
  write_spdi_file(dir / "rendered.spdi", rendered);
  CHECK(read_spdi_file(dir / "rendered.spdi").pixels == rendered.pixels);
}

TEST_CASE("png export writes a parseable header") {
  DepthImage img = render(normalize(make_icosphere(1)), Projection::UV, Rotation{});
  auto dir = spnet::testing::temp_dir("png");
  write_png16(dir / "img.png", img);
  std::string bytes = spnet::testing::slurp(dir / "img.png");
  REQUIRE(bytes.size() > 8 + 25 + 12);
  CHECK(bytes.substr(1, 3) == "PNG");
  CHECK(bytes.find("IHDR") != std::string::npos);
  CHECK(bytes.find("IEND") != std::string::npos);
  // 16-bit grayscale payload: 128 rows of (1 + 256) filtered bytes.
  CHECK(bytes.size() > size_t(128) * 257);
}

}  // TEST_SUITE
