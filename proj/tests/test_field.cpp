#include <doctest.h>

#include <cmath>
#include <random>

#include "eofm/error.hpp"
#include "eofm/field.hpp"
#include "support.hpp"

using namespace eofm;

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(GridGeometry(1, 5), InvalidArgument);
  CHECK_THROWS_AS(GridGeometry(5, 5, 0.0), InvalidArgument);
  CHECK_THROWS_AS(GridGeometry(5, 5, -1.0), InvalidArgument);
  const GridGeometry g(4, 3, 0.5);
  CHECK(g.size() == 12);
  CHECK(g.index(3, 2) == 11);
  CHECK(g.on_boundary(0, 1));
  CHECK_FALSE(g.on_boundary(1, 1));
  CHECK(g.cell_area() == doctest::Approx(0.25));
}

TEST_CASE("field construction rejects a wrong value count") {
  const GridGeometry g(3, 3);
  CHECK_THROWS_AS(ScalarField(g, std::vector<double>(8)), InvalidArgument);
  CHECK_THROWS_AS(VectorField(g, std::vector<double>(9), std::vector<double>(8)), InvalidArgument);
}

TEST_CASE("bilinear sampling is exact at pixels and clamps outside") {
  std::mt19937_64 rng(3);
  const GridGeometry g(6, 5);
  const auto f = test::random_image(g, rng);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) CHECK(f.bilinear(x, y) == f(x, y));
  }
  CHECK(f.bilinear(-3.0, -2.0) == f(0, 0));
  CHECK(f.bilinear(10.0, 1.0) == f(5, 1));
  const double mid = f.bilinear(1.5, 2.0);
  CHECK(mid == doctest::Approx(0.5 * (f(1, 2) + f(2, 2))));
}

TEST_CASE("bilinear reproduces affine functions") {
  const GridGeometry g(7, 7);
  ScalarField f(g);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) f(x, y) = 2.0 * x - 3.0 * y + 1.0;
  }
  CHECK(f.bilinear(2.3, 4.7) == doctest::Approx(2.0 * 2.3 - 3.0 * 4.7 + 1.0).epsilon(1e-12));
}

TEST_CASE("L2 norm scales with spacing") {
  const GridGeometry g(4, 4, 0.5);
  const VectorField f(g, Vec2{3.0, 4.0});
  // sqrt(16 pixels * 25 * 0.25)
  CHECK(field_norm_l2(f) == doctest::Approx(10.0));
  const ScalarField s(g, 2.0);
  CHECK(field_norm_l2(s) == doctest::Approx(4.0));
}

TEST_CASE("linear combination and geometry checks") {
  std::mt19937_64 rng(5);
  const GridGeometry g(5, 4);
  const auto a = test::random_field(g, rng);
  const auto b = test::random_field(g, rng);
  const auto c = field_linear_combine(2.0, a, -1.0, b);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(c.u1()[i] == doctest::Approx(2.0 * a.u1()[i] - b.u1()[i]));
    CHECK(c.u2()[i] == doctest::Approx(2.0 * a.u2()[i] - b.u2()[i]));
  }
  const VectorField other(GridGeometry(4, 5));
  CHECK_THROWS_AS(field_linear_combine(1.0, a, 1.0, other), InvalidArgument);
}

TEST_CASE("finiteness detection") {
  const GridGeometry g(3, 3);
  VectorField f(g);
  CHECK(f.all_finite());
  f.u2()[4] = std::nan("");
  CHECK_FALSE(f.all_finite());
}

TEST_CASE("norm examples") {
  CHECK(field_norm_l2(VectorField(GridGeometry(3, 3))) == 0.0);
  CHECK(field_norm_l2(VectorField(GridGeometry(2, 2), Vec2{3.0, 4.0})) == doctest::Approx(10.0));
  std::mt19937_64 rng(8);
  const GridGeometry g(8, 8);
  const auto f = test::random_field(g, rng);
  long double sum = 0.0L;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const auto v = f.at(x, y);
      sum += static_cast<long double>(v[0]) * v[0] + static_cast<long double>(v[1]) * v[1];
    }
  }
  CHECK(field_norm_l2(f) == doctest::Approx(static_cast<double>(std::sqrt(sum))).epsilon(1e-12));
}

TEST_CASE("background plus update on a hand-computed 4x4 table") {
  const GridGeometry g(4, 4);
  VectorField bg(g);
  VectorField upd(g);
  for (int i = 0; i < 16; ++i) {
    bg.u1()[i] = i;
    bg.u2()[i] = -i;
    upd.u1()[i] = 0.5 * i;
    upd.u2()[i] = 2.0;
  }
  const auto sum = field_linear_combine(1.0, bg, 1.0, upd);
  CHECK(sum.at(0, 0) == Vec2{0.0, 2.0});
  CHECK(sum.at(3, 0) == Vec2{4.5, -1.0});
  CHECK(sum.at(1, 2) == Vec2{13.5, -7.0});
  CHECK(sum.at(3, 3) == Vec2{22.5, -13.0});
  const auto cancel = field_linear_combine(1.0, bg, -1.0, bg);
  CHECK(field_norm_l2(cancel) == 0.0);
  CHECK(field_linear_combine(1.0, bg, 0.0, upd) == bg);
}
