#include "eofm/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eofm/error.hpp"

namespace eofm {

GridGeometry::GridGeometry(int width, int height, double spacing)
    : width(width), height(height), spacing(spacing) {
  if (width < 2 || height < 2) {
    throw InvalidArgument("grid must be at least 2x2, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw InvalidArgument("grid spacing must be positive");
  }
}

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what) {
  if (!(a == b)) {
    throw InvalidArgument(std::string(what) + ": geometry mismatch (" + std::to_string(a.width) +
                          "x" + std::to_string(a.height) + " vs " + std::to_string(b.width) +
                          "x" + std::to_string(b.height) + ")");
  }
}

namespace {

bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Clamped bilinear lookup shared by the scalar and vector samplers.
struct BilinearStencil {
  int x0, x1, y0, y1;
  double fx, fy;
};

BilinearStencil stencil(const GridGeometry& g, double x, double y) {
  x = std::clamp(x, 0.0, g.width - 1.0);
  y = std::clamp(y, 0.0, g.height - 1.0);
  BilinearStencil s{};
  s.x0 = static_cast<int>(std::floor(x));
  s.y0 = static_cast<int>(std::floor(y));
  s.fx = x - s.x0;
  s.fy = y - s.y0;
  s.x1 = std::min(s.x0 + 1, g.width - 1);
  s.y1 = std::min(s.y0 + 1, g.height - 1);
  return s;
}

double interpolate(const std::vector<double>& v, const GridGeometry& g, const BilinearStencil& s) {
  const double top = v[g.index(s.x0, s.y0)] * (1.0 - s.fx) + v[g.index(s.x1, s.y0)] * s.fx;
  const double bottom = v[g.index(s.x0, s.y1)] * (1.0 - s.fx) + v[g.index(s.x1, s.y1)] * s.fx;
  return top * (1.0 - s.fy) + bottom * s.fy;
}

}  // namespace

ScalarField::ScalarField(const GridGeometry& geometry, double fill)
    : geometry_(geometry), values_(geometry.size(), fill) {}

ScalarField::ScalarField(const GridGeometry& geometry, std::vector<double> values)
    : geometry_(geometry), values_(std::move(values)) {
  if (values_.size() != geometry_.size()) {
    throw InvalidArgument("scalar field: value count does not match geometry");
  }
}

double ScalarField::clamped(int x, int y) const noexcept {
  x = std::clamp(x, 0, geometry_.width - 1);
  y = std::clamp(y, 0, geometry_.height - 1);
  return values_[geometry_.index(x, y)];
}

double ScalarField::bilinear(double x, double y) const noexcept {
  return interpolate(values_, geometry_, stencil(geometry_, x, y));
}

bool ScalarField::all_finite() const noexcept { return finite_all(values_); }

VectorField::VectorField(const GridGeometry& geometry, Vec2 fill)
    : geometry_(geometry), u1_(geometry.size(), fill[0]), u2_(geometry.size(), fill[1]) {}

VectorField::VectorField(const GridGeometry& geometry, std::vector<double> u1,
                         std::vector<double> u2)
    : geometry_(geometry), u1_(std::move(u1)), u2_(std::move(u2)) {
  if (u1_.size() != geometry_.size() || u2_.size() != geometry_.size()) {
    throw InvalidArgument("vector field: component length does not match geometry");
  }
}

VectorField::VectorField(ScalarField u1, ScalarField u2)
    : VectorField(u1.geometry(), std::move(u1.values()), std::move(u2.values())) {
  require_same_geometry(u1.geometry(), u2.geometry(), "vector field");
}

Vec2 VectorField::bilinear(double x, double y) const noexcept {
  const auto s = stencil(geometry_, x, y);
  return {interpolate(u1_, geometry_, s), interpolate(u2_, geometry_, s)};
}

ScalarField VectorField::component_field(int c) const {
  return ScalarField(geometry_, component(c));
}

bool VectorField::all_finite() const noexcept { return finite_all(u1_) && finite_all(u2_); }

VectorField field_linear_combine(double a, const VectorField& f, double b, const VectorField& g) {
  require_same_geometry(f.geometry(), g.geometry(), "field_linear_combine");
  VectorField out(f.geometry());
  for (int c = 0; c < 2; ++c) {
    const auto& fc = f.component(c);
    const auto& gc = g.component(c);
    auto& oc = out.component(c);
    for (std::size_t i = 0; i < fc.size(); ++i) oc[i] = a * fc[i] + b * gc[i];
  }
  return out;
}

double field_norm_l2(const VectorField& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sum += f.u1()[i] * f.u1()[i] + f.u2()[i] * f.u2()[i];
  }
  return std::sqrt(sum * f.geometry().cell_area());
}

double field_norm_l2(const ScalarField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum * f.geometry().cell_area());
}

}  // namespace eofm
