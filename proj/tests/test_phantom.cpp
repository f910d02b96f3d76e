#include <doctest.h>

#include <cmath>

#include "eofm/error.hpp"
#include "eofm/phantom.hpp"
#include "support.hpp"

using namespace eofm;

namespace {

PhantomSpec small_spec() {
  PhantomSpec s;
  s.geometry = GridGeometry(64, 64);
  s.inclusion_center = {31.5, 31.5};
  s.inclusion_radius = 12.0;
  s.n_bubbles = 15;
  s.compression = 2.0;
  return s;
}

const MaterialParams kMaterial = MaterialParams::from_young_poisson(1.0, 0.45);

double mean_axial_strain(const Phantom& ph, const PhantomSpec& s, bool inside) {
  double sum = 0.0;
  int n = 0;
  const auto& g = s.geometry;
  for (int y = 1; y < g.height - 1; ++y) {
    for (int x = 1; x < g.width - 1; ++x) {
      const double r = std::hypot(x - s.inclusion_center[0], y - s.inclusion_center[1]);
      if (inside ? r > s.inclusion_radius - 2 : r < s.inclusion_radius + 2) continue;
      sum += std::abs(0.5 * (ph.truth.at(x, y + 1)[1] - ph.truth.at(x, y - 1)[1]));
      ++n;
    }
  }
  return sum / n;
}

}  // namespace

TEST_CASE("zero compression gives zero truth and identical frames") {
  auto s = small_spec();
  s.compression = 0.0;
  const auto ph = generate_phantom(s, kMaterial);
  for (double v : ph.truth.u1()) CHECK(v == 0.0);
  for (double v : ph.truth.u2()) CHECK(v == 0.0);
  CHECK(ph.pair.frame0 == ph.pair.frame1);
}

TEST_CASE("stiffness ratio 1 reproduces the background solve") {
  auto s = small_spec();
  s.stiffness_ratio = 1.0;
  const auto ph = generate_phantom(s, kMaterial);
  const auto bg = solve_background(s.geometry, kMaterial, BoundarySpec::compression(s.compression), 1e-11, 50000);
  CHECK(field_norm_l2(field_linear_combine(1.0, ph.truth, -1.0, bg)) <= 1e-8 * field_norm_l2(bg));
}

TEST_CASE("generation is deterministic for a fixed seed") {
  const auto s = small_spec();
  const auto a = generate_phantom(s, kMaterial);
  const auto b = generate_phantom(s, kMaterial);
  CHECK(a.pair.frame0 == b.pair.frame0);
  CHECK(a.pair.frame1 == b.pair.frame1);
  CHECK(a.truth == b.truth);
  auto other = s;
  other.seed = 2;
  CHECK_FALSE(generate_phantom(other, kMaterial).pair.frame0 == a.pair.frame0);
}

TEST_CASE("a stiff inclusion deforms less than the background") {
  auto s = small_spec();
  s.stiffness_ratio = 10.0;
  const auto ph = generate_phantom(s, kMaterial);
  CHECK(mean_axial_strain(ph, s, true) < mean_axial_strain(ph, s, false));
}

TEST_CASE("truth meets the Dirichlet data and seeded bubbles sample it") {
  const auto s = small_spec();
  const auto ph = generate_phantom(s, kMaterial);
  for (int x = 0; x < 64; ++x) {
    CHECK(ph.truth.at(x, 0) == Vec2{0.0, 0.0});
    CHECK(ph.truth.at(x, 63) == Vec2{0.0, -2.0});
  }
  REQUIRE(ph.seeded_bubbles.size() == 15);
  for (const auto& b : ph.seeded_bubbles) {
    CHECK(b.motion == ph.truth.bilinear(b.center[0], b.center[1]));
  }
}

TEST_CASE("frame 1 carries frame 0 along the truth") {
  // A smooth texture keeps the bilinear resampling error small.
  auto s = small_spec();
  s.n_bubbles = 0;
  s.speckle_blur = 4.0;
  const auto ph = generate_phantom(s, kMaterial);
  double compensated = 0.0;
  double raw = 0.0;
  for (int y = 4; y < 60; ++y) {
    for (int x = 4; x < 60; ++x) {
      const auto u = ph.truth.at(x, y);
      compensated += std::abs(ph.pair.frame1.bilinear(x + u[0], y + u[1]) - ph.pair.frame0(x, y));
      raw += std::abs(ph.pair.frame1(x, y) - ph.pair.frame0(x, y));
    }
  }
  CHECK(compensated < 0.1 * raw);
}

TEST_CASE("inverse displacement inverts the forward map") {
  const GridGeometry g(20, 20);
  VectorField u(g);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) u.set(x, y, {0.05 * y, -0.1 * x + 0.02 * y});
  }
  const auto w = inverse_displacement(u);
  for (int y = 3; y < 15; ++y) {
    for (int x = 3; x < 15; ++x) {
      const auto uu = u.at(x, y);
      const auto back = w.bilinear(x + uu[0], y + uu[1]);
      CHECK(std::abs(back[0] + uu[0]) < 1e-9);
      CHECK(std::abs(back[1] + uu[1]) < 1e-9);
    }
  }
}

TEST_CASE("invalid specifications") {
  auto s = small_spec();
  s.inclusion_radius = 40.0;
  CHECK_THROWS_AS(generate_phantom(s, kMaterial), InvalidArgument);
  s = small_spec();
  s.n_bubbles = 2000;
  CHECK_THROWS_AS(generate_phantom(s, kMaterial), InvalidArgument);
  s = small_spec();
  s.bubble_radius_range = {3.0, 2.0};
  CHECK_THROWS_AS(generate_phantom(s, kMaterial), InvalidArgument);
}
