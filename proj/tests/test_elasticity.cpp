#include <doctest.h>

#include <cmath>
#include <random>

#include "eofm/elasticity.hpp"
#include "eofm/error.hpp"
#include "support.hpp"

using namespace eofm;

TEST_CASE("material conversions") {
  const auto m = MaterialParams::from_young_poisson(2.0, 0.25);
  CHECK(m.young_modulus() == doctest::Approx(2.0));
  CHECK(m.poisson_ratio() == doctest::Approx(0.25));
  CHECK(m.mu == doctest::Approx(0.8));
  CHECK_THROWS_AS(MaterialParams::from_young_poisson(1.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS((MaterialParams{-1.0, 1.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((MaterialParams{0.0, 0.0}.validate()), InvalidArgument);
}

TEST_CASE("a Dirichlet segment is required") {
  const GridGeometry g(6, 6);
  CHECK_THROWS_AS(solve_background(g, MaterialParams{}, BoundarySpec::natural()), InvalidArgument);
}

TEST_CASE("zero load gives the zero field") {
  const GridGeometry g(20, 16);
  const auto u = solve_background(g, MaterialParams::from_young_poisson(1.0, 0.45),
                                  test::compression_bc(0.0));
  for (double v : u.u1()) CHECK(v == 0.0);
  for (double v : u.u2()) CHECK(v == 0.0);
}

TEST_CASE("lambda = 0 strip compresses linearly") {
  const GridGeometry g(24, 61);
  const double c = 3.0;
  const auto u = solve_background(g, MaterialParams{0.0, 1.0}, test::compression_bc(c), 1e-12, 50000);
  const int h = g.height - 1;
  for (int y = h / 3; y <= 2 * h / 3; ++y) {
    const double expected = -c * y / h;
    for (int x = 0; x < g.width; ++x) {
      CHECK(std::abs(u.at(x, y)[1] - expected) <= 0.02 * std::abs(expected));
      CHECK(std::abs(u.at(x, y)[0]) <= 1e-8);
    }
  }
}

TEST_CASE("Dirichlet values are imposed exactly") {
  const GridGeometry g(12, 10);
  const auto u = solve_background(g, MaterialParams::from_young_poisson(1.0, 0.45),
                                  test::compression_bc(1.7));
  for (int x = 0; x < g.width; ++x) {
    CHECK(u.at(x, 0) == Vec2{0.0, 0.0});
    CHECK(u.at(x, g.height - 1) == Vec2{0.0, -1.7});
  }
}

TEST_CASE("16x16 solve matches a dense direct solve of the same system") {
  std::mt19937_64 rng(21);
  const GridGeometry g(16, 16);
  for (int trial = 0; trial < 3; ++trial) {
    const MaterialParams mat{test::uniform(rng, 0.0, 3.0), test::uniform(rng, 0.2, 2.0)};
    BoundarySpec bc;
    bc.add({Edge::top, 0, 8, BoundaryKind::dirichlet, {test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)}});
    bc.add({Edge::top, 8, -1, BoundaryKind::dirichlet, {test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)}});
    bc.add({Edge::bottom, 0, -1, BoundaryKind::dirichlet, {test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)}});
    bc.add({Edge::left, 0, -1, BoundaryKind::traction_free, {0.0, 0.0}});
    ScalarField factor(g);
    for (auto& v : factor.values()) v = test::uniform(rng, 0.5, 4.0);
    const auto sys = assemble_elasticity(g, mat, bc, &factor);
    CHECK(sys.stiffness.is_exactly_symmetric());
    const Eigen::VectorXd ref = test::to_dense(sys.stiffness).ldlt().solve(test::to_eigen(sys.rhs));
    const auto u = solve_elasticity(g, mat, bc, &factor, 1e-13, 100000);
    const Eigen::VectorXd got = test::to_eigen(sys.dofs.restrict_to_free(u));
    CHECK((got - ref).norm() <= 1e-8 * ref.norm());
  }
}

TEST_CASE("solution is linear in the boundary data") {
  const GridGeometry g(14, 12);
  const auto mat = MaterialParams::from_young_poisson(1.0, 0.3);
  const auto u1 = solve_background(g, mat, test::compression_bc(1.0), 1e-12, 50000);
  const auto u2 = solve_background(g, mat, test::compression_bc(2.0), 1e-12, 50000);
  const auto diff = field_linear_combine(2.0, u1, -1.0, u2);
  CHECK(field_norm_l2(diff) <= 1e-9 * field_norm_l2(u2));
}

TEST_CASE("symmetric setup gives mirror-symmetric fields") {
  const GridGeometry g(17, 13);
  const auto u = solve_background(g, MaterialParams::from_young_poisson(1.0, 0.45),
                                  test::compression_bc(2.0), 1e-12, 50000);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const auto a = u.at(x, y);
      const auto b = u.at(g.width - 1 - x, y);
      CHECK(a[0] == doctest::Approx(-b[0]).epsilon(1e-7).scale(1.0));
      CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("compressed sample bulges laterally") {
  const GridGeometry g(32, 32);
  const auto u = solve_background(g, MaterialParams::from_young_poisson(1.0, 0.45),
                                  test::compression_bc(2.0));
  CHECK(u.at(0, 16)[0] < 0.0);
  CHECK(u.at(31, 16)[0] > 0.0);
  CHECK(u.at(16, 16)[1] < 0.0);
}

TEST_CASE("non-convergence reports the residual") {
  const GridGeometry g(30, 30);
  try {
    solve_background(g, MaterialParams::from_young_poisson(1.0, 0.45), test::compression_bc(1.0), 1e-12, 2);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.residual() > 1e-12);
  }
}
