#pragma once

#include <optional>
#include <vector>

#include "eofm/boundary.hpp"
#include "eofm/derivatives.hpp"
#include "eofm/dof_map.hpp"
#include "eofm/field.hpp"
#include "eofm/sparse.hpp"
#include "eofm/speckle_tracker.hpp"

namespace eofm {

enum class BcMode {
  natural,         ///< unconstrained minimization; zero normal derivative emerges
  dirichlet_hard,  ///< boundary unknowns eliminated at their prescribed values
  dirichlet_weak,  ///< penalty gamma * sum over the boundary of |v - g|^2 * h
};

const char* to_string(BcMode mode);
BcMode parse_bc_mode(const std::string& text);

/// Parameters of the elastographic optical-flow functional
///   F(v) = sum_x h^2 (grad I . (u_bg + v) + I_t)^2 + alpha R(v) + beta S(v) [+ gamma B(v)].
struct SolverConfig {
  double alpha = 0.8;  ///< smoothness weight; must be > 0
  double beta = 0.0;   ///< speckle weight
  double sigma = 5.0;  ///< Gaussian width of the speckle term, in grid length units
  /// Optional per-bubble weights; when empty each bubble's own `weight` is
  /// used. Each bubble contributes with beta * weight.
  std::vector<double> per_bubble_weights;
  BcMode bc_mode = BcMode::dirichlet_hard;
  double weak_gamma = 1e3;
  /// Background field u_bg; when set the unknown is the update v = u - u_bg.
  std::optional<VectorField> background;
  double lin_tol = 1e-8;
  int lin_max_iter = 10000;

  void validate() const;
};

/// a(u, v) = b(v) with Dirichlet unknowns eliminated: `op` is the Hessian of F
/// over the free unknowns, `rhs` = -grad F(0) restricted to them.
struct AssembledSystem {
  CsrMatrix op;
  std::vector<double> rhs;
  DofMap dofs;
};

/// (1 / (2 pi sigma^2)) exp(-|x - center|^2 / (2 sigma^2)); zero beyond 3 sigma.
double gaussian_weight(const Vec2& x, const Vec2& center, double sigma);

/// Per-pixel speckle data: total Gaussian mass and the mass-weighted bubble
/// targets (bubble motion minus the background at the bubble center).
struct SpeckleTerm {
  std::vector<double> mass;
  std::vector<Vec2> weighted_target;
  std::vector<Vec2> targets;  ///< per bubble
  std::vector<double> weights;  ///< per bubble, beta * weight
};

SpeckleTerm speckle_term(const GridGeometry& geometry, const std::vector<Bubble>& bubbles,
                         const SolverConfig& cfg);

/// Assembles the discrete problem. `linearization` is the field frame1 has
/// already been warped by (multi-scale warping); the data residual is then
/// I_t + grad I . (u_bg - linearization). Without it the linearization point is 0.
AssembledSystem assemble(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                         const SolverConfig& cfg, const BoundarySpec& bc,
                         const VectorField* linearization = nullptr);

/// PCG solve of an assembled system, returning v on the full grid (the update
/// when a background is configured). `initial` is an optional full-grid guess.
VectorField solve(const AssembledSystem& system, const SolverConfig& cfg,
                  const VectorField* initial = nullptr);

struct FunctionalParts {
  double data = 0.0;
  double smoothness = 0.0;  ///< R(v), unweighted
  double speckle = 0.0;     ///< sum_i w_i sum_x h^2 g_i(x) |v - t_i|^2, unweighted by beta
  double boundary = 0.0;    ///< B(v), unweighted; weak mode only
  double total = 0.0;       ///< data + alpha R + beta S + gamma B
};

/// Direct evaluation of F at `v` (for verification; independent of assembly).
FunctionalParts functional_value(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                                 const SolverConfig& cfg, const BoundarySpec& bc,
                                 const VectorField& v, const VectorField* linearization = nullptr);

}  // namespace eofm
