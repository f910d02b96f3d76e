#include "eofm/elasticity.hpp"

#include <array>
#include <cmath>
#include <string>

#include "eofm/error.hpp"

namespace eofm {

namespace {

using ElementMatrix = std::array<std::array<double, 8>, 8>;

// Local node order: (x,y), (x+1,y), (x+1,y+1), (x,y+1). Local dof 2a+c is
// component c of node a.
constexpr std::array<int, 4> kNodeDx = {0, 1, 1, 0};
constexpr std::array<int, 4> kNodeDy = {0, 0, 1, 1};

ElementMatrix element_stiffness(const MaterialParams& m, double h) {
  const double ref_xi[4] = {-1.0, 1.0, 1.0, -1.0};
  const double ref_eta[4] = {-1.0, -1.0, 1.0, 1.0};
  const double gauss = 1.0 / std::sqrt(3.0);
  const double d11 = m.lambda + 2.0 * m.mu;
  const double d12 = m.lambda;
  const double d33 = m.mu;
  const double det_j = 0.25 * h * h;

  ElementMatrix k{};
  for (double xi : {-gauss, gauss}) {
    for (double eta : {-gauss, gauss}) {
      double dndx[4];
      double dndy[4];
      for (int a = 0; a < 4; ++a) {
        dndx[a] = 0.25 * ref_xi[a] * (1.0 + ref_eta[a] * eta) * (2.0 / h);
        dndy[a] = 0.25 * ref_eta[a] * (1.0 + ref_xi[a] * xi) * (2.0 / h);
      }
      // B columns: strain (exx, eyy, gxy) produced by each local dof.
      double b[3][8] = {};
      for (int a = 0; a < 4; ++a) {
        b[0][2 * a] = dndx[a];
        b[1][2 * a + 1] = dndy[a];
        b[2][2 * a] = dndy[a];
        b[2][2 * a + 1] = dndx[a];
      }
      for (int i = 0; i < 8; ++i) {
        const double s0 = d11 * b[0][i] + d12 * b[1][i];
        const double s1 = d12 * b[0][i] + d11 * b[1][i];
        const double s2 = d33 * b[2][i];
        for (int j = i; j < 8; ++j) {
          k[i][j] += (s0 * b[0][j] + s1 * b[1][j] + s2 * b[2][j]) * det_j;
        }
      }
    }
  }
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < i; ++j) k[i][j] = k[j][i];
  }
  return k;
}

double cell_factor(const ScalarField* factor, int x, int y) {
  if (!factor) return 1.0;
  double inv_sum = 0.0;
  for (int a = 0; a < 4; ++a) inv_sum += 1.0 / (*factor)(x + kNodeDx[a], y + kNodeDy[a]);
  return 4.0 / inv_sum;
}

}  // namespace

MaterialParams MaterialParams::from_young_poisson(double young, double poisson) {
  if (!(young > 0.0) || !(poisson >= 0.0 && poisson < 0.5)) {
    throw InvalidArgument("material: need E > 0 and 0 <= nu < 0.5");
  }
  MaterialParams m;
  m.mu = young / (2.0 * (1.0 + poisson));
  m.lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  return m;
}

void MaterialParams::validate() const {
  if (!(mu > 0.0) || !(lambda >= 0.0) || !std::isfinite(mu) || !std::isfinite(lambda)) {
    throw InvalidArgument("material: need mu > 0 and lambda >= 0");
  }
}

ElasticSystem assemble_elasticity(const GridGeometry& g, const MaterialParams& material,
                                  const BoundarySpec& bc, const ScalarField* stiffness_factor) {
  material.validate();
  if (stiffness_factor) {
    require_same_geometry(g, stiffness_factor->geometry(), "stiffness factor");
    for (double f : stiffness_factor->values()) {
      if (!(f > 0.0) || !std::isfinite(f)) throw InvalidArgument("stiffness factor must be positive");
    }
  }
  if (!bc.has_dirichlet()) {
    throw InvalidArgument("elasticity needs at least one Dirichlet segment to remove rigid motions");
  }
  const auto labels = bc.label(g);
  const std::size_t n = g.size();

  ElasticSystem sys;
  auto& dofs = sys.dofs;
  dofs.geometry = g;
  dofs.index.assign(2 * n, -1);
  dofs.pinned_value.assign(2 * n, 0.0);
  int free_count = 0;
  bool any_pinned = false;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t p = 0; p < n; ++p) {
      if (labels.is_dirichlet(p)) {
        dofs.pinned_value[c * n + p] = labels.value[p][c];
        any_pinned = true;
      } else {
        dofs.index[c * n + p] = free_count++;
      }
    }
  }
  dofs.free_count = free_count;
  if (!any_pinned) throw InvalidArgument("Dirichlet segments cover no pixels");

  const auto k_ref = element_stiffness(material, g.spacing);
  TripletBuilder builder(free_count);
  builder.reserve(static_cast<std::size_t>(g.width - 1) * (g.height - 1) * 64);
  sys.rhs.assign(static_cast<std::size_t>(free_count), 0.0);

  for (int y = 0; y + 1 < g.height; ++y) {
    for (int x = 0; x + 1 < g.width; ++x) {
      const double factor = cell_factor(stiffness_factor, x, y);
      std::array<std::size_t, 8> global{};
      for (int a = 0; a < 4; ++a) {
        const auto p = g.index(x + kNodeDx[a], y + kNodeDy[a]);
        global[2 * a] = p;
        global[2 * a + 1] = n + p;
      }
      for (int i = 0; i < 8; ++i) {
        const int row = dofs.index[global[i]];
        if (row < 0) continue;
        for (int j = 0; j < 8; ++j) {
          const double kij = factor * k_ref[i][j];
          const int column = dofs.index[global[j]];
          if (column >= 0) {
            builder.add(row, column, kij);
          } else {
            sys.rhs[row] -= kij * dofs.pinned_value[global[j]];
          }
        }
      }
    }
  }
  sys.stiffness = builder.build();
  return sys;
}

VectorField solve_elasticity(const GridGeometry& g, const MaterialParams& material,
                             const BoundarySpec& bc, const ScalarField* stiffness_factor,
                             double tol, int max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("elasticity: tolerance must be positive");
  const auto sys = assemble_elasticity(g, material, bc, stiffness_factor);
  const auto result = solve_pcg(sys.stiffness, sys.rhs, {tol, max_iter});
  return sys.dofs.expand(result.x);
}

VectorField solve_background(const GridGeometry& g, const MaterialParams& material,
                             const BoundarySpec& bc, double tol, int max_iter) {
  return solve_elasticity(g, material, bc, nullptr, tol, max_iter);
}

}  // namespace eofm
