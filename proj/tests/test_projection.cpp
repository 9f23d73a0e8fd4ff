#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spnet/errors.hpp"
#include "spnet/projection.hpp"

using namespace spnet;
using spnet::testing::kPi;

namespace {

const Projection kSphereKinds[4] = {Projection::UV, Projection::KavrayskiyVII,
                                    Projection::EckertIV, Projection::Cassini};

}  // namespace

TEST_SUITE("projection") {

TEST_CASE("spherical_coords axis conventions") {
  SphereCoord c = spherical_coords({0, 1, 0});
  CHECK(c.lon == doctest::Approx(0.0));
  CHECK(c.lat == doctest::Approx(0.0));

  c = spherical_coords({1, 0, 0});
  CHECK(c.lon == doctest::Approx(kPi / 2));
  CHECK(c.lat == doctest::Approx(0.0));

  c = spherical_coords({0, 0, 1});
  CHECK(c.lon == doctest::Approx(0.0));  // atan2(0, 0) convention at the pole
  CHECK(c.lat == doctest::Approx(kPi / 2));
}

TEST_CASE("spherical_coords rejects non-unit input") {
  CHECK_THROWS_AS(spherical_coords({1, 1, 0}), NotUnit);
}

TEST_CASE("to_direction inverts spherical_coords") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Vec3 d = spnet::testing::random_unit(rng);
    Vec3 back = to_direction(spherical_coords(d));
    CHECK(norm(back - d) < 1e-9);
  }
}

TEST_CASE("uv worked value") {
  PlaneCoord p = project(Projection::UV, {kPi / 2, 0});
  CHECK(p.u == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(p.v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kavrayskiy worked value") {
  // u(pi, pi/2) = (3 pi / 2) sqrt(1/3 - 1/4)
  PlaneCoord p = project(Projection::KavrayskiyVII, {kPi, kPi / 2});
  double expected = 1.5 * kPi * std::sqrt(1.0 / 3.0 - 0.25);
  CHECK(expected == doctest::Approx(1.36035).epsilon(1e-5));
  CHECK(p.u == doctest::Approx(expected).epsilon(1e-12));
  CHECK(p.v == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("eckert worked value at the pole") {
  double expected = std::sqrt(2.0 * kPi / 3.0);  // (2 - 1) * scale
  CHECK(expected == doctest::Approx(1.44720).epsilon(1e-5));
  PlaneCoord north = project(Projection::EckertIV, {0.7, kPi / 2});
  CHECK(north.v == doctest::Approx(expected).epsilon(1e-9));
  PlaneCoord south = project(Projection::EckertIV, {0.7, -kPi / 2});
  CHECK(south.v == doctest::Approx(-expected).epsilon(1e-9));
}

TEST_CASE("cassini worked value") {
  PlaneCoord p = project(Projection::Cassini, {0, 0.3});
  CHECK(p.u == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.v == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("sphere-side round trip on an interior grid") {
  for (Projection kind : kSphereKinds) {
    for (int i = 0; i < 17; ++i) {
      for (int j = 0; j < 17; ++j) {
        SphereCoord c{2 * kPi * (double(i) + 0.5) / 17 - kPi,
                      kPi * ((double(j) + 0.5) / 17 - 0.5)};
        SphereCoord back = unproject(kind, project(kind, c));
        CHECK(std::fabs(back.lon - c.lon) < 1e-9);
        CHECK(std::fabs(back.lat - c.lat) < 1e-9);
      }
    }
  }
}

TEST_CASE("plane-side round trip on in-region points") {
  Rng rng(23);
  for (Projection kind : kSphereKinds) {
    PlaneBounds b = plane_bounds(kind);
    int accepted = 0;
    while (accepted < 200) {
      PlaneCoord p{rng.uniform(b.umin, b.umax), rng.uniform(b.vmin, b.vmax)};
      if (!in_region(kind, p)) continue;
      // Stay off the exact boundary where inverse trig saturates.
      PlaneCoord shrunk{p.u * 0.999, p.v * 0.999};
      if (!in_region(kind, shrunk)) continue;
      ++accepted;
      PlaneCoord back = project(kind, unproject(kind, shrunk));
      CHECK(std::fabs(back.u - shrunk.u) < 1e-9);
      CHECK(std::fabs(back.v - shrunk.v) < 1e-9);
    }
  }
}

TEST_CASE("kavrayskiy lateral lobes are out of region") {
  CHECK_THROWS_AS(unproject(Projection::KavrayskiyVII, {10.0, 0.0}), OutOfRegion);
  // max |u| on the equator is (3 pi / 2) sqrt(1/3)
  double lobe = 1.5 * kPi * std::sqrt(1.0 / 3.0);
  CHECK(lobe == doctest::Approx(2.7207).epsilon(1e-4));
  CHECK_THROWS_AS(unproject(Projection::KavrayskiyVII, {lobe + 0.01, 0.0}), OutOfRegion);
  CHECK_NOTHROW(unproject(Projection::KavrayskiyVII, {lobe - 0.01, 0.0}));
}

TEST_CASE("eckert corners are out of region") {
  PlaneBounds b = plane_bounds(Projection::EckertIV);
  CHECK_FALSE(in_region(Projection::EckertIV, {b.umax * 0.99, b.vmax * 0.99}));
  CHECK(in_region(Projection::EckertIV, {0.0, b.vmax * 0.5}));
}

TEST_CASE("uv center pixel") {
  PlaneCoord p = pixel_to_plane(Projection::UV, 64, 64);
  CHECK(p.u == doctest::Approx(0.50390625).epsilon(1e-12));
  CHECK(p.v == doctest::Approx(0.50390625).epsilon(1e-12));
}

TEST_CASE("pixel maps invert everywhere") {
  for (Projection kind : {Projection::UV, Projection::KavrayskiyVII, Projection::EckertIV,
                          Projection::Cassini, Projection::DepthMapYZ, Projection::PanoramaZ}) {
    for (int r = 0; r < 128; ++r) {
      for (int c = 0; c < 128; ++c) {
        auto [rr, cc] = plane_to_pixel(kind, pixel_to_plane(kind, r, c));
        REQUIRE(rr == r);
        REQUIRE(cc == c);
      }
    }
  }
}

TEST_CASE("cassini corner pixel sits near the window corner") {
  PlaneCoord p = pixel_to_plane(Projection::Cassini, 0, 0);
  CHECK(p.u == doctest::Approx(-kPi + 2 * kPi * 0.5 / 128).epsilon(1e-12));
  CHECK(p.v == doctest::Approx(-kPi / 2 + kPi * 0.5 / 128).epsilon(1e-12));
  CHECK(std::fabs(p.u - (-kPi)) < 2 * kPi / 128);
  CHECK(std::fabs(p.v - (-kPi / 2)) < kPi / 128);
}

TEST_CASE("cassini poles map to +-pi/2") {
  PlaneCoord north = project(Projection::Cassini, {0.4, kPi / 2});
  CHECK(north.v == doctest::Approx(kPi / 2).epsilon(1e-9));
  PlaneCoord south = project(Projection::Cassini, {0.4, -kPi / 2});
  CHECK(south.v == doctest::Approx(-kPi / 2).epsilon(1e-9));
}

}  // TEST_SUITE
