#include "eofm/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "eofm/error.hpp"

namespace eofm {

namespace {

int edge_length(Edge e, const GridGeometry& g) {
  return (e == Edge::top || e == Edge::bottom) ? g.width : g.height;
}

// Pixel indices covered by a segment, with its extents resolved.
template <typename Fn>
void for_each_pixel(const BoundarySegment& s, const GridGeometry& g, Fn&& fn) {
  const int len = edge_length(s.edge, g);
  const int end = s.end < 0 ? len : s.end;
  for (int t = s.begin; t < end; ++t) {
    switch (s.edge) {
      case Edge::top: fn(g.index(t, 0)); break;
      case Edge::bottom: fn(g.index(t, g.height - 1)); break;
      case Edge::left:
        if (t > 0 && t < g.height - 1) fn(g.index(0, t));
        break;
      case Edge::right:
        if (t > 0 && t < g.height - 1) fn(g.index(g.width - 1, t));
        break;
    }
  }
}

}  // namespace

BoundarySpec BoundarySpec::compression(double compression, BoundaryKind side_kind) {
  BoundarySpec spec;
  spec.add({Edge::top, 0, -1, BoundaryKind::dirichlet, {0.0, 0.0}});
  spec.add({Edge::bottom, 0, -1, BoundaryKind::dirichlet, {0.0, -compression}});
  spec.add({Edge::left, 0, -1, side_kind, {0.0, 0.0}});
  spec.add({Edge::right, 0, -1, side_kind, {0.0, 0.0}});
  return spec;
}

void BoundarySpec::validate(const GridGeometry& g) const {
  std::vector<char> covered(g.size(), 0);
  for (const auto& s : segments_) {
    const int len = edge_length(s.edge, g);
    const int end = s.end < 0 ? len : s.end;
    if (s.begin < 0 || end > len || s.begin > end) {
      throw InvalidArgument(std::string("boundary segment on ") + to_string(s.edge) +
                            " edge exceeds the edge length");
    }
    if (!std::isfinite(s.value[0]) || !std::isfinite(s.value[1])) {
      throw InvalidArgument("boundary value must be finite");
    }
    for_each_pixel(s, g, [&](std::size_t i) {
      if (covered[i]) {
        throw InvalidArgument(std::string("boundary segments overlap on ") + to_string(s.edge) +
                              " edge");
      }
      covered[i] = 1;
    });
  }
}

BoundaryLabels BoundarySpec::label(const GridGeometry& g) const {
  validate(g);
  BoundaryLabels labels;
  labels.kind.assign(g.size(), BoundaryKind::natural);
  labels.value.assign(g.size(), Vec2{0.0, 0.0});
  for (const auto& s : segments_) {
    for_each_pixel(s, g, [&](std::size_t i) {
      labels.kind[i] = s.kind;
      labels.value[i] = s.value;
    });
  }
  return labels;
}

bool BoundarySpec::has_dirichlet() const noexcept {
  return std::any_of(segments_.begin(), segments_.end(),
                     [](const auto& s) { return s.kind == BoundaryKind::dirichlet; });
}

BoundarySpec BoundarySpec::rescaled(double scale, const GridGeometry& target) const {
  BoundarySpec out;
  for (auto s : segments_) {
    const int len = edge_length(s.edge, target);
    s.begin = std::clamp(static_cast<int>(std::floor(s.begin * scale)), 0, len);
    if (s.end >= 0) s.end = std::clamp(static_cast<int>(std::ceil(s.end * scale)), s.begin, len);
    s.value = {s.value[0] * scale, s.value[1] * scale};
    out.add(s);
  }
  return out;
}

BoundarySpec BoundarySpec::with_kind_replaced(BoundaryKind from, BoundaryKind to) const {
  BoundarySpec out = *this;
  for (auto& s : out.segments_) {
    if (s.kind == from) s.kind = to;
  }
  return out;
}

const char* to_string(Edge edge) {
  switch (edge) {
    case Edge::top: return "top";
    case Edge::bottom: return "bottom";
    case Edge::left: return "left";
    case Edge::right: return "right";
  }
  return "?";
}

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::natural: return "natural";
    case BoundaryKind::traction_free: return "traction_free";
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::follow_background: return "follow_background";
  }
  return "?";
}

Edge parse_edge(const std::string& text) {
  if (text == "top") return Edge::top;
  if (text == "bottom") return Edge::bottom;
  if (text == "left") return Edge::left;
  if (text == "right") return Edge::right;
  throw InvalidArgument("unknown edge '" + text + "'");
}

BoundaryKind parse_boundary_kind(const std::string& text) {
  if (text == "natural") return BoundaryKind::natural;
  if (text == "traction_free" || text == "free") return BoundaryKind::traction_free;
  if (text == "dirichlet") return BoundaryKind::dirichlet;
  if (text == "follow_background") return BoundaryKind::follow_background;
  throw InvalidArgument("unknown boundary kind '" + text + "'");
}

}  // namespace eofm
