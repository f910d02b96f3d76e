#include "eofm/derivatives.hpp"

#include "eofm/error.hpp"

namespace eofm {

ImagePair::ImagePair(ScalarField f0, ScalarField f1)
    : frame0(std::move(f0)), frame1(std::move(f1)) {
  require_same_geometry(frame0.geometry(), frame1.geometry(), "image pair");
  if (!frame0.all_finite() || !frame1.all_finite()) {
    throw InvalidArgument("image pair contains non-finite values");
  }
}

Gradient image_gradient(const ScalarField& image) {
  const auto& g = image.geometry();
  Gradient grad{ScalarField(g), ScalarField(g)};
  const double inv_h = 1.0 / g.spacing;
  const double inv_2h = 0.5 / g.spacing;
  const int w = g.width;
  const int h = g.height;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx;
      if (x == 0) {
        dx = (image(1, y) - image(0, y)) * inv_h;
      } else if (x == w - 1) {
        dx = (image(w - 1, y) - image(w - 2, y)) * inv_h;
      } else {
        dx = (image(x + 1, y) - image(x - 1, y)) * inv_2h;
      }
      double dy;
      if (y == 0) {
        dy = (image(x, 1) - image(x, 0)) * inv_h;
      } else if (y == h - 1) {
        dy = (image(x, h - 1) - image(x, h - 2)) * inv_h;
      } else {
        dy = (image(x, y + 1) - image(x, y - 1)) * inv_2h;
      }
      grad.dx(x, y) = dx;
      grad.dy(x, y) = dy;
    }
  }
  return grad;
}

Gradient spatial_gradient(const ImagePair& pair) {
  auto g0 = image_gradient(pair.frame0);
  const auto g1 = image_gradient(pair.frame1);
  for (std::size_t i = 0; i < g0.dx.size(); ++i) {
    g0.dx[i] = 0.5 * (g0.dx[i] + g1.dx[i]);
    g0.dy[i] = 0.5 * (g0.dy[i] + g1.dy[i]);
  }
  return g0;
}

ScalarField temporal_derivative(const ImagePair& pair) {
  ScalarField out(pair.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pair.frame1[i] - pair.frame0[i];
  return out;
}

ScalarField warp_image(const ScalarField& image, const VectorField& u) {
  require_same_geometry(image.geometry(), u.geometry(), "warp_image");
  const auto& g = image.geometry();
  const double inv_h = 1.0 / g.spacing;
  ScalarField out(g);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const auto i = g.index(x, y);
      out[i] = image.bilinear(x + u.u1()[i] * inv_h, y + u.u2()[i] * inv_h);
    }
  }
  return out;
}

}  // namespace eofm
