#pragma once

#include <string>
#include <vector>

#include "eofm/field.hpp"

namespace eofm {

enum class Edge { top, bottom, left, right };

enum class BoundaryKind {
  natural,        ///< no condition; the variational problem's own boundary condition
  traction_free,  ///< free surface for elasticity; natural for the flow functional
  dirichlet,      ///< prescribed displacement `value`
  follow_background,  ///< flow update pinned to zero (u = u_bg); natural without a background
};

/// A run of boundary pixels along one edge. Top/bottom edges own the corner
/// pixels; left/right segments skip rows 0 and height-1. `end < 0` means
/// "to the end of the edge".
struct BoundarySegment {
  Edge edge = Edge::top;
  int begin = 0;
  int end = -1;
  BoundaryKind kind = BoundaryKind::natural;
  Vec2 value{0.0, 0.0};
};

/// Per-pixel boundary labels, row-major over the grid. Interior pixels and
/// unlisted boundary pixels are `natural`.
struct BoundaryLabels {
  std::vector<BoundaryKind> kind;
  std::vector<Vec2> value;

  bool is_dirichlet(std::size_t i) const noexcept { return kind[i] == BoundaryKind::dirichlet; }
};

class BoundarySpec {
 public:
  BoundarySpec() = default;
  explicit BoundarySpec(std::vector<BoundarySegment> segments) : segments_(std::move(segments)) {}

  /// All-natural boundary (plain optical flow).
  static BoundarySpec natural() { return {}; }

  /// Sample fixed on top (u = 0) and pushed up from the bottom by `compression`
  /// (u = (0, -compression), axial axis pointing down); sides take `side_kind`.
  static BoundarySpec compression(double compression,
                                  BoundaryKind side_kind = BoundaryKind::traction_free);

  const std::vector<BoundarySegment>& segments() const noexcept { return segments_; }
  void add(BoundarySegment s) { segments_.push_back(s); }

  /// Throws InvalidArgument if segments overlap or leave the grid.
  void validate(const GridGeometry& geometry) const;
  BoundaryLabels label(const GridGeometry& geometry) const;
  bool has_dirichlet() const noexcept;

  /// The same conditions on a grid rescaled by `scale`: extents and Dirichlet
  /// values are multiplied by `scale` and clamped to `target`.
  BoundarySpec rescaled(double scale, const GridGeometry& target) const;

  /// Replaces every segment of `from` kind with `to` kind.
  BoundarySpec with_kind_replaced(BoundaryKind from, BoundaryKind to) const;

 private:
  std::vector<BoundarySegment> segments_;
};

const char* to_string(Edge edge);
const char* to_string(BoundaryKind kind);
Edge parse_edge(const std::string& text);
BoundaryKind parse_boundary_kind(const std::string& text);

}  // namespace eofm
