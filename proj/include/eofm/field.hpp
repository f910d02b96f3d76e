#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace eofm {

using Vec2 = std::array<double, 2>;

/// Pixel grid. x (column) is lateral, y (row) is axial and points down.
struct GridGeometry {
  int width = 0;
  int height = 0;
  double spacing = 1.0;

  GridGeometry() = default;
  GridGeometry(int width, int height, double spacing = 1.0);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool contains(const Vec2& p) const noexcept {
    return p[0] >= 0.0 && p[1] >= 0.0 && p[0] <= width - 1.0 && p[1] <= height - 1.0;
  }
  bool on_boundary(int x, int y) const noexcept {
    return x == 0 || y == 0 || x == width - 1 || y == height - 1;
  }
  double cell_area() const noexcept { return spacing * spacing; }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridGeometry& geometry, double fill = 0.0);
  ScalarField(const GridGeometry& geometry, std::vector<double> values);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  int width() const noexcept { return geometry_.width; }
  int height() const noexcept { return geometry_.height; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int x, int y) noexcept { return values_[geometry_.index(x, y)]; }
  double operator()(int x, int y) const noexcept { return values_[geometry_.index(x, y)]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Clamp-to-edge sample at integer coordinates.
  double clamped(int x, int y) const noexcept;
  /// Bilinear sample with clamp-to-edge outside the grid.
  double bilinear(double x, double y) const noexcept;

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
};

/// Displacement-like field: u1 lateral, u2 axial, both stored row-major.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const GridGeometry& geometry, Vec2 fill = {0.0, 0.0});
  VectorField(const GridGeometry& geometry, std::vector<double> u1, std::vector<double> u2);
  VectorField(ScalarField u1, ScalarField u2);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  int width() const noexcept { return geometry_.width; }
  int height() const noexcept { return geometry_.height; }
  std::size_t size() const noexcept { return u1_.size(); }

  std::vector<double>& u1() noexcept { return u1_; }
  std::vector<double>& u2() noexcept { return u2_; }
  const std::vector<double>& u1() const noexcept { return u1_; }
  const std::vector<double>& u2() const noexcept { return u2_; }
  std::vector<double>& component(int c) noexcept { return c == 0 ? u1_ : u2_; }
  const std::vector<double>& component(int c) const noexcept { return c == 0 ? u1_ : u2_; }

  Vec2 at(int x, int y) const noexcept {
    const auto i = geometry_.index(x, y);
    return {u1_[i], u2_[i]};
  }
  void set(int x, int y, Vec2 v) noexcept {
    const auto i = geometry_.index(x, y);
    u1_[i] = v[0];
    u2_[i] = v[1];
  }
  Vec2 bilinear(double x, double y) const noexcept;

  ScalarField component_field(int c) const;

  bool all_finite() const noexcept;

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  GridGeometry geometry_;
  std::vector<double> u1_;
  std::vector<double> u2_;
};

/// a*f + b*g componentwise. Throws InvalidArgument on geometry mismatch.
VectorField field_linear_combine(double a, const VectorField& f, double b, const VectorField& g);

/// Discrete L2 norm: sqrt(sum(u1^2 + u2^2) * spacing^2).
double field_norm_l2(const VectorField& f);
double field_norm_l2(const ScalarField& f);

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what);

}  // namespace eofm
