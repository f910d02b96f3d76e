#include "eofm/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eofm/error.hpp"

namespace eofm {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

ScalarField blur(const ScalarField& image, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const auto& g = image.geometry();
  ScalarField tmp(g);
  ScalarField out(g);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * image.clamped(x + i, y);
      tmp(x, y) = s;
    }
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * tmp.clamped(x, y + i);
      out(x, y) = s;
    }
  }
  return out;
}

GridGeometry coarser(const GridGeometry& g) {
  return GridGeometry(coarser_size(g.width), coarser_size(g.height), g.spacing);
}

std::vector<Bubble> scale_bubbles(const std::vector<Bubble>& bubbles, double scale,
                                  const GridGeometry& g) {
  std::vector<Bubble> out;
  for (auto b : bubbles) {
    b.center = {b.center[0] * scale, b.center[1] * scale};
    b.motion = {b.motion[0] * scale, b.motion[1] * scale};
    if (g.contains(b.center)) out.push_back(b);
  }
  return out;
}

}  // namespace

int coarser_size(int n) { return (n + 1) / 2; }

ScalarField downsample_image(const ScalarField& image) {
  const auto blurred = blur(image, kPyramidBlurSigma);
  const auto cg = coarser(image.geometry());
  ScalarField out(cg);
  for (int y = 0; y < cg.height; ++y) {
    for (int x = 0; x < cg.width; ++x) out(x, y) = blurred(2 * x, 2 * y);
  }
  return out;
}

VectorField downsample_field(const VectorField& field) {
  const auto& g = field.geometry();
  const auto cg = coarser(g);
  VectorField out(cg);
  for (int y = 0; y < cg.height; ++y) {
    for (int x = 0; x < cg.width; ++x) {
      const auto v = field.at(2 * x, 2 * y);
      out.set(x, y, {0.5 * v[0], 0.5 * v[1]});
    }
  }
  return out;
}

VectorField upsample_field(const VectorField& coarse, const GridGeometry& fine) {
  if (coarser_size(fine.width) != coarse.width() || coarser_size(fine.height) != coarse.height()) {
    throw InvalidArgument("upsample_field: grids are not one pyramid step apart");
  }
  VectorField out(fine);
  for (int y = 0; y < fine.height; ++y) {
    for (int x = 0; x < fine.width; ++x) {
      const auto v = coarse.bilinear(0.5 * x, 0.5 * y);
      out.set(x, y, {2.0 * v[0], 2.0 * v[1]});
    }
  }
  return out;
}

std::vector<PyramidLevel> build_pyramid(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                                        int levels) {
  if (levels < 1) throw InvalidArgument("build_pyramid: levels must be >= 1");
  int w = pair.geometry().width;
  int h = pair.geometry().height;
  for (int k = 1; k < levels; ++k) {
    w = coarser_size(w);
    h = coarser_size(h);
  }
  if (w < kMinLevelSize || h < kMinLevelSize) {
    throw InvalidArgument("build_pyramid: " + std::to_string(levels) + " levels would shrink " +
                          std::to_string(pair.geometry().width) + "x" +
                          std::to_string(pair.geometry().height) + " below 8x8");
  }
  std::vector<PyramidLevel> out;
  out.push_back({0, pair, 1.0, bubbles});
  for (int k = 1; k < levels; ++k) {
    const auto& prev = out.back();
    PyramidLevel lvl;
    lvl.level = k;
    lvl.scale = std::ldexp(1.0, -k);
    lvl.pair = ImagePair(downsample_image(prev.pair.frame0), downsample_image(prev.pair.frame1));
    lvl.bubbles = scale_bubbles(bubbles, lvl.scale, lvl.pair.geometry());
    out.push_back(std::move(lvl));
  }
  return out;
}

VectorField run_coarse_to_fine(const std::vector<PyramidLevel>& levels, const SolverConfig& cfg,
                               const BoundarySpec& bc,
                               const std::optional<VectorField>& background) {
  if (levels.empty()) throw InvalidArgument("run_coarse_to_fine: no levels");
  cfg.validate();
  std::vector<std::optional<VectorField>> backgrounds(levels.size());
  if (background) {
    require_same_geometry(background->geometry(), levels.front().pair.geometry(), "background");
    backgrounds[0] = background;
    for (std::size_t k = 1; k < levels.size(); ++k) {
      backgrounds[k] = downsample_field(*backgrounds[k - 1]);
    }
  }

  VectorField estimate;
  for (auto k = static_cast<int>(levels.size()) - 1; k >= 0; --k) {
    const auto& lvl = levels[static_cast<std::size_t>(k)];
    const auto& g = lvl.pair.geometry();
    SolverConfig level_cfg = cfg;
    level_cfg.sigma = k == 0 ? cfg.sigma : std::max(cfg.sigma * lvl.scale, g.spacing);
    level_cfg.background = backgrounds[static_cast<std::size_t>(k)];
    if (!cfg.per_bubble_weights.empty() && lvl.bubbles.size() != cfg.per_bubble_weights.size()) {
      // Per-bubble weights follow their bubbles only while none are dropped.
      throw InvalidArgument("run_coarse_to_fine: per-bubble weights with bubbles dropped at level " +
                            std::to_string(k));
    }
    const auto level_bc = bc.rescaled(lvl.scale, g);

    const bool coarsest = k == static_cast<int>(levels.size()) - 1;
    VectorField update;
    if (coarsest) {
      const auto sys = assemble(lvl.pair, lvl.bubbles, level_cfg, level_bc);
      update = solve(sys, level_cfg);
    } else {
      const auto linearization = upsample_field(estimate, g);
      const ImagePair warped(lvl.pair.frame0, warp_image(lvl.pair.frame1, linearization));
      const auto sys = assemble(warped, lvl.bubbles, level_cfg, level_bc, &linearization);
      const auto guess = level_cfg.background
                             ? field_linear_combine(1.0, linearization, -1.0, *level_cfg.background)
                             : linearization;
      update = solve(sys, level_cfg, &guess);
    }
    estimate = level_cfg.background ? field_linear_combine(1.0, *level_cfg.background, 1.0, update)
                                    : std::move(update);
    if (level_cfg.background && cfg.bc_mode == BcMode::dirichlet_hard) {
      // bg + (g - bg) can differ from g in the last bit; restore g exactly.
      const auto labels = level_bc.label(g);
      for (std::size_t p = 0; p < g.size(); ++p) {
        if (labels.is_dirichlet(p)) {
          estimate.u1()[p] = labels.value[p][0];
          estimate.u2()[p] = labels.value[p][1];
        }
      }
    }
  }
  return estimate;
}

}  // namespace eofm
