#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "eofm/boundary.hpp"
#include "eofm/derivatives.hpp"
#include "eofm/field.hpp"
#include "eofm/sparse.hpp"
#include "eofm/speckle_tracker.hpp"

namespace eofm::test {

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline ScalarField random_image(const GridGeometry& g, std::mt19937_64& rng) {
  ScalarField f(g);
  for (auto& v : f.values()) v = uniform(rng);
  return f;
}

inline ImagePair random_pair(const GridGeometry& g, std::mt19937_64& rng) {
  auto a = random_image(g, rng);
  auto b = random_image(g, rng);
  return ImagePair(std::move(a), std::move(b));
}

inline VectorField random_field(const GridGeometry& g, std::mt19937_64& rng, double amplitude = 1.0) {
  VectorField f(g);
  for (auto& v : f.u1()) v = uniform(rng, -amplitude, amplitude);
  for (auto& v : f.u2()) v = uniform(rng, -amplitude, amplitude);
  return f;
}

inline std::vector<Bubble> random_bubbles(const GridGeometry& g, int n, std::mt19937_64& rng) {
  std::vector<Bubble> out;
  for (int i = 0; i < n; ++i) {
    Bubble b;
    b.center = {uniform(rng, 0.0, g.width - 1.0), uniform(rng, 0.0, g.height - 1.0)};
    b.motion = {uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)};
    b.weight = uniform(rng, 0.5, 2.0);
    out.push_back(b);
  }
  return out;
}

inline Eigen::MatrixXd to_dense(const CsrMatrix& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.n, a.n);
  for (int r = 0; r < a.n; ++r) {
    for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) m(r, a.col[k]) += a.val[k];
  }
  return m;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Fixed top, compressed bottom, sides of the given kind.
inline BoundarySpec compression_bc(double c, BoundaryKind sides = BoundaryKind::traction_free) {
  return BoundarySpec::compression(c, sides);
}

/// Translates an image by an integer offset using a larger canvas so that no
/// border extrapolation enters either frame: frame1(x + d) = frame0(x).
inline ImagePair translated_pair(const ScalarField& canvas, int width, int height, int dx, int dy) {
  const GridGeometry g(width, height);
  ScalarField f0(g);
  ScalarField f1(g);
  const int ox = std::max(0, dx);
  const int oy = std::max(0, dy);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      f0(x, y) = canvas(x + ox, y + oy);
      f1(x, y) = canvas(x + ox - dx, y + oy - dy);
    }
  }
  return ImagePair(std::move(f0), std::move(f1));
}

}  // namespace eofm::test
