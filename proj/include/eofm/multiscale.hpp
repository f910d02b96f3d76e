#pragma once

#include <optional>
#include <vector>

#include "eofm/boundary.hpp"
#include "eofm/derivatives.hpp"
#include "eofm/solver.hpp"
#include "eofm/speckle_tracker.hpp"

namespace eofm {

struct PyramidLevel {
  int level = 0;        ///< 0 is the finest
  ImagePair pair;
  double scale = 1.0;   ///< 2^-level
  std::vector<Bubble> bubbles;  ///< centers and motions multiplied by `scale`
};

inline constexpr int kMinLevelSize = 8;
inline constexpr double kPyramidBlurSigma = 1.0;

/// Size of the next coarser level: ceil(n / 2).
int coarser_size(int n);

/// Gaussian blur (std 1.0, clamp-to-edge) followed by keeping every even pixel.
ScalarField downsample_image(const ScalarField& image);

/// Keeps every even pixel and halves the values (displacements in coarse pixels).
VectorField downsample_field(const VectorField& field);

/// Bilinear interpolation onto `fine` (fine pixel x sits at coarse x / 2), values doubled.
VectorField upsample_field(const VectorField& coarse, const GridGeometry& fine);

/// Levels finest first. Throws InvalidArgument if the coarsest level would be
/// smaller than 8x8. Bubbles that leave a level's grid are dropped there.
std::vector<PyramidLevel> build_pyramid(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                                        int levels);

/// Coarse-to-fine estimation. At the coarsest level the functional is
/// linearized at zero; at each finer level frame1 is warped by the upsampled
/// estimate and the functional is re-linearized there. The regularizer always
/// acts on the full update, so levels = 1 is exactly one assemble + solve.
/// `background`, when given, is at full resolution. Returns the full field
/// u (background plus update).
VectorField run_coarse_to_fine(const std::vector<PyramidLevel>& levels, const SolverConfig& cfg,
                               const BoundarySpec& bc,
                               const std::optional<VectorField>& background);

}  // namespace eofm
