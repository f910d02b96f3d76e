#include "eofm/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "eofm/error.hpp"

namespace eofm {

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ScalarField gaussian_blur(const ScalarField& image, double sigma) {
  if (sigma <= 0.0) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  const auto& g = image.geometry();
  ScalarField tmp(g);
  ScalarField out(g);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * image.clamped(x + i, y);
      tmp(x, y) = s;
    }
  }
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * tmp.clamped(x, y + i);
      out(x, y) = s;
    }
  }
  return out;
}

// Blurred uniform noise standardized to zero mean and unit variance.
ScalarField standard_noise(const PhantomSpec& spec, std::mt19937_64& rng) {
  const auto& g = spec.geometry;
  ScalarField noise(g);
  for (auto& v : noise.values()) v = uniform01(rng);
  noise = gaussian_blur(noise, spec.speckle_blur);
  double mean = 0.0;
  for (double v : noise.values()) mean += v;
  mean /= static_cast<double>(noise.size());
  double var = 0.0;
  for (double v : noise.values()) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(noise.size()));
  for (auto& v : noise.values()) v = stddev > 0.0 ? (v - mean) / stddev : 0.0;
  return noise;
}

double texture_value(const PhantomSpec& spec, double z) {
  return std::clamp(spec.speckle_mean + spec.speckle_contrast * z, 0.0, 1.0);
}

struct Disc {
  Vec2 center;
  double radius;
};

std::vector<Disc> place_bubbles(const PhantomSpec& spec, std::mt19937_64& rng) {
  const auto& g = spec.geometry;
  const auto [r_lo, r_hi] = spec.bubble_radius_range;
  std::vector<Disc> discs;
  const long max_attempts = 100L * spec.n_bubbles;
  long attempts = 0;
  while (static_cast<int>(discs.size()) < spec.n_bubbles) {
    if (attempts++ >= max_attempts) {
      throw InvalidArgument("phantom: could not place " + std::to_string(spec.n_bubbles) +
                            " non-overlapping bubbles after " + std::to_string(max_attempts) +
                            " attempts");
    }
    const double r = r_lo + (r_hi - r_lo) * uniform01(rng);
    const double margin = r + 1.0;
    const double x = margin + (g.width - 1.0 - 2.0 * margin) * uniform01(rng);
    const double y = margin + (g.height - 1.0 - 2.0 * margin) * uniform01(rng);
    // A two-pixel gap keeps neighbouring discs in separate 8-connected components.
    const bool clear = std::all_of(discs.begin(), discs.end(), [&](const Disc& d) {
      const double dx = d.center[0] - x;
      const double dy = d.center[1] - y;
      return std::hypot(dx, dy) >= d.radius + r + 2.0;
    });
    if (clear) discs.push_back({{x, y}, r});
  }
  return discs;
}

void draw_disc(ScalarField& image, const Disc& d, double intensity) {
  const auto& g = image.geometry();
  const int x_lo = std::max(0, static_cast<int>(std::floor(d.center[0] - d.radius - 1)));
  const int x_hi = std::min(g.width - 1, static_cast<int>(std::ceil(d.center[0] + d.radius + 1)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(d.center[1] - d.radius - 1)));
  const int y_hi = std::min(g.height - 1, static_cast<int>(std::ceil(d.center[1] + d.radius + 1)));
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double dist = std::hypot(x - d.center[0], y - d.center[1]);
      const double coverage = std::clamp(d.radius + 0.5 - dist, 0.0, 1.0);
      image(x, y) = std::max(image(x, y), intensity * coverage);
    }
  }
}

}  // namespace

void PhantomSpec::validate() const {
  const auto& g = geometry;
  if (!(inclusion_radius > 0.0)) throw InvalidArgument("phantom: inclusion radius must be > 0");
  if (inclusion_center[0] - inclusion_radius < 0.0 || inclusion_center[1] - inclusion_radius < 0.0 ||
      inclusion_center[0] + inclusion_radius > g.width - 1.0 ||
      inclusion_center[1] + inclusion_radius > g.height - 1.0) {
    throw InvalidArgument("phantom: inclusion must lie inside the image");
  }
  if (!(stiffness_ratio > 0.0)) throw InvalidArgument("phantom: stiffness_ratio must be > 0");
  if (n_bubbles < 0) throw InvalidArgument("phantom: n_bubbles must be >= 0");
  if (!(bubble_radius_range.first > 0.0) || bubble_radius_range.second < bubble_radius_range.first) {
    throw InvalidArgument("phantom: bubble radius range must be positive and ordered");
  }
  if (!std::isfinite(compression)) throw InvalidArgument("phantom: compression must be finite");
  if (!(speckle_contrast >= 0.0) || !(speckle_blur >= 0.0)) {
    throw InvalidArgument("phantom: speckle parameters must be non-negative");
  }
  if (!(bubble_intensity > 0.0 && bubble_intensity <= 1.0)) {
    throw InvalidArgument("phantom: bubble_intensity must lie in (0, 1]");
  }
}

VectorField inverse_displacement(const VectorField& u) {
  const auto& g = u.geometry();
  const double inv_h = 1.0 / g.spacing;
  VectorField w(g);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      // Fixed point of p = y - u(p); a contraction while |grad u| < 1.
      double px = x;
      double py = y;
      for (int it = 0; it < 200; ++it) {
        const auto v = u.bilinear(px, py);
        const double nx = x - v[0] * inv_h;
        const double ny = y - v[1] * inv_h;
        const double step = std::abs(nx - px) + std::abs(ny - py);
        px = nx;
        py = ny;
        if (step < 1e-13) break;
      }
      w.set(x, y, {(px - x) * g.spacing, (py - y) * g.spacing});
    }
  }
  return w;
}

Phantom generate_phantom(const PhantomSpec& spec, const MaterialParams& material,
                         const BoundarySpec& bc) {
  spec.validate();
  material.validate();
  const auto& g = spec.geometry;
  std::mt19937_64 rng(spec.seed);

  const auto z0 = standard_noise(spec, rng);
  const auto discs = place_bubbles(spec, rng);
  ScalarField frame0(g);
  for (std::size_t p = 0; p < g.size(); ++p) frame0[p] = texture_value(spec, z0[p]);
  for (const auto& d : discs) draw_disc(frame0, d, spec.bubble_intensity);

  ScalarField stiffness(g, 1.0);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (std::hypot(x - spec.inclusion_center[0], y - spec.inclusion_center[1]) <=
          spec.inclusion_radius) {
        stiffness(x, y) = spec.stiffness_ratio;
      }
    }
  }

  Phantom out;
  out.truth = solve_elasticity(g, material, bc, &stiffness, spec.solver_tol, spec.solver_max_iter);
  out.stiffness = std::move(stiffness);
  auto frame1 = warp_image(frame0, inverse_displacement(out.truth));
  out.pair = ImagePair(std::move(frame0), std::move(frame1));
  for (const auto& d : discs) {
    Bubble b;
    b.center = d.center;
    b.motion = out.truth.bilinear(d.center[0], d.center[1]);
    b.match_score = 1.0;
    out.seeded_bubbles.push_back(b);
  }
  return out;
}

Phantom generate_phantom(const PhantomSpec& spec, const MaterialParams& material) {
  return generate_phantom(spec, material, BoundarySpec::compression(spec.compression));
}

}  // namespace eofm
