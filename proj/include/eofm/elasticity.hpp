#pragma once

#include <optional>
#include <vector>

#include "eofm/boundary.hpp"
#include "eofm/dof_map.hpp"
#include "eofm/field.hpp"
#include "eofm/sparse.hpp"

namespace eofm {

/// Isotropic linear-elastic material (Lamé parameters, consistent arbitrary units).
struct MaterialParams {
  double lambda = 0.0;
  double mu = 1.0;

  static MaterialParams from_young_poisson(double young, double poisson);
  double young_modulus() const noexcept { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }
  double poisson_ratio() const noexcept { return lambda / (2.0 * (lambda + mu)); }
  void validate() const;
};

/// Discrete plane-strain system with Dirichlet unknowns eliminated.
/// Unknowns are component-planar: index c * N + pixel.
struct ElasticSystem {
  CsrMatrix stiffness;
  std::vector<double> rhs;
  DofMap dofs;
};

/// Bilinear (Q1) finite elements whose nodes are the pixel centers, 2x2 Gauss
/// quadrature, plane strain. `stiffness_factor`, when given, scales the
/// material per pixel; each cell uses the harmonic mean of its four corners.
/// Traction-free and natural sides receive no rows of their own: zero traction
/// is the natural condition of the energy.
ElasticSystem assemble_elasticity(const GridGeometry& geometry, const MaterialParams& material,
                                  const BoundarySpec& bc,
                                  const ScalarField* stiffness_factor = nullptr);

/// Displacement of a sample with per-pixel stiffness scaling under `bc`.
VectorField solve_elasticity(const GridGeometry& geometry, const MaterialParams& material,
                             const BoundarySpec& bc, const ScalarField* stiffness_factor,
                             double tol, int max_iter);

/// Background field u_bg of the homogeneous sample.
VectorField solve_background(const GridGeometry& geometry, const MaterialParams& material,
                             const BoundarySpec& bc, double tol = 1e-8, int max_iter = 20000);

}  // namespace eofm
