#include "eofm/dof_map.hpp"

#include "eofm/error.hpp"

namespace eofm {

VectorField DofMap::expand(const std::vector<double>& free_values) const {
  if (free_values.size() != static_cast<std::size_t>(free_count)) {
    throw InvalidArgument("dof map: unknown vector has the wrong length");
  }
  VectorField u(geometry);
  const std::size_t n = geometry.size();
  for (int c = 0; c < 2; ++c) {
    auto& comp = u.component(c);
    for (std::size_t p = 0; p < n; ++p) {
      const auto s = slot(geometry, c, p);
      comp[p] = index[s] < 0 ? pinned_value[s] : free_values[static_cast<std::size_t>(index[s])];
    }
  }
  return u;
}

std::vector<double> DofMap::restrict_to_free(const VectorField& field) const {
  require_same_geometry(geometry, field.geometry(), "dof map");
  std::vector<double> out(static_cast<std::size_t>(free_count));
  const std::size_t n = geometry.size();
  for (int c = 0; c < 2; ++c) {
    const auto& comp = field.component(c);
    for (std::size_t p = 0; p < n; ++p) {
      const int k = index[slot(geometry, c, p)];
      if (k >= 0) out[static_cast<std::size_t>(k)] = comp[p];
    }
  }
  return out;
}

}  // namespace eofm
