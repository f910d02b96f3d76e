#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "eofm/boundary.hpp"
#include "eofm/derivatives.hpp"
#include "eofm/elasticity.hpp"
#include "eofm/speckle_tracker.hpp"

namespace eofm {

/// Synthetic compression experiment: speckle texture with bright bubbles and
/// a circular inclusion of different stiffness.
struct PhantomSpec {
  GridGeometry geometry{256, 256};
  Vec2 inclusion_center{127.5, 127.5};
  double inclusion_radius = 40.0;
  double stiffness_ratio = 5.0;  ///< inclusion E / background E
  int n_bubbles = 200;
  std::pair<double, double> bubble_radius_range{2.0, 4.0};
  double compression = 8.0;      ///< bottom edge pushed up by this many pixels
  std::uint64_t seed = 1;

  // Texture: blurred uniform noise standardized to `speckle_mean` +/- `speckle_contrast`.
  double speckle_mean = 0.2;
  double speckle_contrast = 0.015;
  double speckle_blur = 1.0;
  double bubble_intensity = 0.3;  ///< weak reflectors over a faint texture

  double solver_tol = 1e-10;
  int solver_max_iter = 50000;

  void validate() const;
};

struct Phantom {
  ImagePair pair;
  VectorField truth;                 ///< forward displacement of frame-0 material points
  std::vector<Bubble> seeded_bubbles;  ///< true centers, motion = truth(center)
  ScalarField stiffness;             ///< per-pixel stiffness factor
};

/// Frame 0 is texture plus bubbles; the truth comes from an inhomogeneous
/// plane-strain solve under `bc`; frame 1 satisfies frame1(x + truth(x)) = frame0(x),
/// built by inverting x -> x + truth(x) with a fixed-point iteration.
/// Throws InvalidArgument if bubble placement fails after 100 * n_bubbles draws.
Phantom generate_phantom(const PhantomSpec& spec, const MaterialParams& material,
                         const BoundarySpec& bc);

/// Uses BoundarySpec::compression(spec.compression).
Phantom generate_phantom(const PhantomSpec& spec, const MaterialParams& material);

/// Displacement w with w(y) = x - y where x + u(x) = y, so that
/// warp_image(I, w)(x + u(x)) = I(x).
VectorField inverse_displacement(const VectorField& u);

}  // namespace eofm
