#pragma once

#include <utility>

#include "eofm/field.hpp"

namespace eofm {

/// Two frames of the same scene: `frame0` at time t, `frame1` at t+1.
struct ImagePair {
  ScalarField frame0;
  ScalarField frame1;

  ImagePair() = default;
  /// Throws InvalidArgument unless both frames share a geometry and hold finite values.
  ImagePair(ScalarField frame0, ScalarField frame1);

  const GridGeometry& geometry() const noexcept { return frame0.geometry(); }
};

struct Gradient {
  ScalarField dx;  ///< lateral derivative
  ScalarField dy;  ///< axial derivative
};

/// Central differences inside, one-sided on the edges, per frame.
Gradient image_gradient(const ScalarField& image);

/// Gradient averaged over both frames: 0.5 * (grad frame0 + grad frame1).
Gradient spatial_gradient(const ImagePair& pair);

/// frame1 - frame0 (unit time step).
ScalarField temporal_derivative(const ImagePair& pair);

/// Backward warp: out(x) = image(x + u(x)), bilinear, clamp-to-edge outside.
/// Displacements are in the same length unit as the grid spacing.
ScalarField warp_image(const ScalarField& image, const VectorField& u);

}  // namespace eofm
