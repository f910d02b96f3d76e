#pragma once

#include <vector>

#include "eofm/field.hpp"

namespace eofm {

/// Maps the two displacement components of every pixel onto unknowns.
/// Unknown slots are component-planar: slot c * N + pixel. Pinned slots carry
/// a prescribed value instead of an unknown index.
struct DofMap {
  GridGeometry geometry;
  std::vector<int> index;            ///< size 2N; -1 for pinned slots
  std::vector<double> pinned_value;  ///< size 2N
  int free_count = 0;

  static std::size_t slot(const GridGeometry& g, int component, std::size_t pixel) noexcept {
    return static_cast<std::size_t>(component) * g.size() + pixel;
  }

  /// Free unknowns and pinned values scattered back onto the grid.
  VectorField expand(const std::vector<double>& free_values) const;
  /// The free unknowns of a full field (pinned slots dropped).
  std::vector<double> restrict_to_free(const VectorField& field) const;
};

}  // namespace eofm
