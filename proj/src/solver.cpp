#include "eofm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "eofm/error.hpp"

namespace eofm {

const char* to_string(BcMode mode) {
  switch (mode) {
    case BcMode::natural: return "natural";
    case BcMode::dirichlet_hard: return "dirichlet_hard";
    case BcMode::dirichlet_weak: return "dirichlet_weak";
  }
  return "?";
}

BcMode parse_bc_mode(const std::string& text) {
  if (text == "natural") return BcMode::natural;
  if (text == "dirichlet_hard" || text == "hard") return BcMode::dirichlet_hard;
  if (text == "dirichlet_weak" || text == "weak") return BcMode::dirichlet_weak;
  throw InvalidArgument("unknown bc_mode '" + text + "'");
}

void SolverConfig::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("solver: alpha must be > 0");
  if (!(beta >= 0.0)) throw InvalidArgument("solver: beta must be >= 0");
  if (!(sigma > 0.0)) throw InvalidArgument("solver: sigma must be > 0");
  if (!(lin_tol > 0.0)) throw InvalidArgument("solver: lin_tol must be > 0");
  if (lin_max_iter <= 0) throw InvalidArgument("solver: lin_max_iter must be > 0");
  if (bc_mode == BcMode::dirichlet_weak && !(weak_gamma > 0.0)) {
    throw InvalidArgument("solver: weak_gamma must be > 0");
  }
  for (double w : per_bubble_weights) {
    if (!(w > 0.0)) throw InvalidArgument("solver: per-bubble weights must be > 0");
  }
  if (background && !background->all_finite()) {
    throw InvalidArgument("solver: background field is not finite");
  }
}

double gaussian_weight(const Vec2& x, const Vec2& center, double sigma) {
  const double dx = x[0] - center[0];
  const double dy = x[1] - center[1];
  const double d2 = dx * dx + dy * dy;
  if (d2 > 9.0 * sigma * sigma) return 0.0;
  return std::exp(-d2 / (2.0 * sigma * sigma)) / (2.0 * std::numbers::pi * sigma * sigma);
}

namespace {

// Residual r(x) = I_t + grad I . (u_bg - linearization), plus the gradient.
struct DataTerm {
  Gradient grad;
  std::vector<double> residual;
};

DataTerm data_term(const ImagePair& pair, const SolverConfig& cfg, const VectorField* linearization) {
  DataTerm d{spatial_gradient(pair), temporal_derivative(pair).values()};
  const bool has_bg = cfg.background.has_value();
  if (!has_bg && !linearization) return d;
  for (std::size_t i = 0; i < d.residual.size(); ++i) {
    double s1 = 0.0;
    double s2 = 0.0;
    if (has_bg) {
      s1 += cfg.background->u1()[i];
      s2 += cfg.background->u2()[i];
    }
    if (linearization) {
      s1 -= linearization->u1()[i];
      s2 -= linearization->u2()[i];
    }
    d.residual[i] += d.grad.dx[i] * s1 + d.grad.dy[i] * s2;
  }
  return d;
}

// Boundary pixels constrained by the flow problem and the value v must take there.
struct FlowConstraints {
  std::vector<char> active;
  std::vector<Vec2> target;
};

FlowConstraints flow_constraints(const GridGeometry& g, const SolverConfig& cfg,
                                 const BoundarySpec& bc) {
  FlowConstraints fc;
  fc.active.assign(g.size(), 0);
  fc.target.assign(g.size(), Vec2{0.0, 0.0});
  if (cfg.bc_mode == BcMode::natural) return fc;
  const auto labels = bc.label(g);
  const bool has_bg = cfg.background.has_value();
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (labels.kind[p] == BoundaryKind::dirichlet) {
      fc.active[p] = 1;
      fc.target[p] = labels.value[p];
      if (has_bg) {
        fc.target[p][0] -= cfg.background->u1()[p];
        fc.target[p][1] -= cfg.background->u2()[p];
      }
    } else if (labels.kind[p] == BoundaryKind::follow_background && has_bg) {
      fc.active[p] = 1;
    }
  }
  return fc;
}

void check_inputs(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                  const SolverConfig& cfg, const VectorField* linearization) {
  cfg.validate();
  const auto& g = pair.geometry();
  if (cfg.background) require_same_geometry(g, cfg.background->geometry(), "background");
  if (linearization) require_same_geometry(g, linearization->geometry(), "linearization");
  if (!cfg.per_bubble_weights.empty() && cfg.per_bubble_weights.size() != bubbles.size()) {
    throw InvalidArgument("solver: per_bubble_weights has " +
                          std::to_string(cfg.per_bubble_weights.size()) + " entries for " +
                          std::to_string(bubbles.size()) + " bubbles");
  }
}

}  // namespace

SpeckleTerm speckle_term(const GridGeometry& g, const std::vector<Bubble>& bubbles,
                         const SolverConfig& cfg) {
  SpeckleTerm st;
  st.mass.assign(g.size(), 0.0);
  st.weighted_target.assign(g.size(), Vec2{0.0, 0.0});
  if (cfg.beta == 0.0) return st;
  const double h = g.spacing;
  const double reach = 3.0 * cfg.sigma / h;
  for (std::size_t i = 0; i < bubbles.size(); ++i) {
    const auto& b = bubbles[i];
    const double w =
        cfg.beta * (cfg.per_bubble_weights.empty() ? b.weight : cfg.per_bubble_weights[i]);
    Vec2 target = b.motion;
    if (cfg.background) {
      const auto bg = cfg.background->bilinear(b.center[0], b.center[1]);
      target[0] -= bg[0];
      target[1] -= bg[1];
    }
    st.targets.push_back(target);
    st.weights.push_back(w);
    const Vec2 center{b.center[0] * h, b.center[1] * h};
    const int x_lo = std::max(0, static_cast<int>(std::floor(b.center[0] - reach)));
    const int x_hi = std::min(g.width - 1, static_cast<int>(std::ceil(b.center[0] + reach)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(b.center[1] - reach)));
    const int y_hi = std::min(g.height - 1, static_cast<int>(std::ceil(b.center[1] + reach)));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double gw = w * gaussian_weight({x * h, y * h}, center, cfg.sigma);
        if (gw == 0.0) continue;
        const auto p = g.index(x, y);
        st.mass[p] += gw;
        st.weighted_target[p][0] += gw * target[0];
        st.weighted_target[p][1] += gw * target[1];
      }
    }
  }
  return st;
}

AssembledSystem assemble(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                         const SolverConfig& cfg, const BoundarySpec& bc,
                         const VectorField* linearization) {
  check_inputs(pair, bubbles, cfg, linearization);
  const auto& g = pair.geometry();
  const std::size_t n = g.size();
  const double area = g.cell_area();
  const auto data = data_term(pair, cfg, linearization);
  const auto speckle = speckle_term(g, bubbles, cfg);
  const auto constraints = flow_constraints(g, cfg, bc);
  const bool hard = cfg.bc_mode == BcMode::dirichlet_hard;
  const bool weak = cfg.bc_mode == BcMode::dirichlet_weak;

  AssembledSystem sys;
  auto& dofs = sys.dofs;
  dofs.geometry = g;
  dofs.index.assign(2 * n, -1);
  dofs.pinned_value.assign(2 * n, 0.0);
  int free_count = 0;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t p = 0; p < n; ++p) {
      const auto s = DofMap::slot(g, c, p);
      if (hard && constraints.active[p]) {
        dofs.pinned_value[s] = constraints.target[p][c];
      } else {
        dofs.index[s] = free_count++;
      }
    }
  }
  dofs.free_count = free_count;

  // Full-grid Hessian entries are routed through `couple`: free-free pairs go
  // to the operator, free-pinned pairs move to the right-hand side.
  TripletBuilder builder(free_count);
  builder.reserve(n * 14);
  sys.rhs.assign(static_cast<std::size_t>(free_count), 0.0);
  auto couple = [&](std::size_t si, std::size_t sj, double value) {
    const int row = dofs.index[si];
    if (row < 0) return;
    const int column = dofs.index[sj];
    if (column >= 0) {
      builder.add(row, column, value);
    } else {
      sys.rhs[static_cast<std::size_t>(row)] -= value * dofs.pinned_value[sj];
    }
  };
  auto load = [&](std::size_t si, double value) {
    const int row = dofs.index[si];
    if (row >= 0) sys.rhs[static_cast<std::size_t>(row)] += value;
  };

  const double two_alpha = 2.0 * cfg.alpha;
  const double weak_weight = 2.0 * cfg.weak_gamma * g.spacing;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const auto p = g.index(x, y);
      const auto s1 = DofMap::slot(g, 0, p);
      const auto s2 = DofMap::slot(g, 1, p);
      const double gx = data.grad.dx[p];
      const double gy = data.grad.dy[p];
      double d11 = 2.0 * area * (gx * gx + speckle.mass[p]);
      double d22 = 2.0 * area * (gy * gy + speckle.mass[p]);
      const double d12 = 2.0 * area * gx * gy;
      double b1 = 2.0 * area * (speckle.weighted_target[p][0] - data.residual[p] * gx);
      double b2 = 2.0 * area * (speckle.weighted_target[p][1] - data.residual[p] * gy);
      if (weak && constraints.active[p]) {
        d11 += weak_weight;
        d22 += weak_weight;
        b1 += weak_weight * constraints.target[p][0];
        b2 += weak_weight * constraints.target[p][1];
      }
      // Smoothness couples each pixel with its right and lower neighbors.
      const bool has_right = x + 1 < g.width;
      const bool has_down = y + 1 < g.height;
      const int degree = (x > 0) + (y > 0) + has_right + has_down;
      d11 += two_alpha * degree;
      d22 += two_alpha * degree;

      couple(s1, s1, d11);
      couple(s1, s2, d12);
      couple(s2, s1, d12);
      couple(s2, s2, d22);
      load(s1, b1);
      load(s2, b2);
      for (int c = 0; c < 2; ++c) {
        const auto sp = DofMap::slot(g, c, p);
        if (x > 0) couple(sp, DofMap::slot(g, c, g.index(x - 1, y)), -two_alpha);
        if (y > 0) couple(sp, DofMap::slot(g, c, g.index(x, y - 1)), -two_alpha);
        if (has_right) couple(sp, DofMap::slot(g, c, g.index(x + 1, y)), -two_alpha);
        if (has_down) couple(sp, DofMap::slot(g, c, g.index(x, y + 1)), -two_alpha);
      }
    }
  }
  sys.op = builder.build();
  return sys;
}

VectorField solve(const AssembledSystem& system, const SolverConfig& cfg,
                  const VectorField* initial) {
  cfg.validate();
  std::vector<double> guess;
  if (initial) guess = system.dofs.restrict_to_free(*initial);
  const auto result = solve_pcg(system.op, system.rhs, {cfg.lin_tol, cfg.lin_max_iter}, guess);
  return system.dofs.expand(result.x);
}

FunctionalParts functional_value(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                                 const SolverConfig& cfg, const BoundarySpec& bc,
                                 const VectorField& v, const VectorField* linearization) {
  check_inputs(pair, bubbles, cfg, linearization);
  const auto& g = pair.geometry();
  require_same_geometry(g, v.geometry(), "functional_value");
  const double area = g.cell_area();
  const double h = g.spacing;
  const auto& v1 = v.u1();
  const auto& v2 = v.u2();

  FunctionalParts parts;
  const auto data = data_term(pair, cfg, linearization);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double e = data.grad.dx[p] * v1[p] + data.grad.dy[p] * v2[p] + data.residual[p];
    parts.data += area * e * e;
  }

  // R(v) = sum over pixel edges of h^2 |(v_q - v_p) / h|^2.
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const auto p = g.index(x, y);
      for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
        if (!g.contains(x + dx, y + dy)) continue;
        const auto q = g.index(x + dx, y + dy);
        const double a = v1[q] - v1[p];
        const double b = v2[q] - v2[p];
        parts.smoothness += a * a + b * b;
      }
    }
  }

  if (cfg.beta != 0.0) {
    for (std::size_t i = 0; i < bubbles.size(); ++i) {
      const auto& b = bubbles[i];
      const double w = cfg.per_bubble_weights.empty() ? b.weight : cfg.per_bubble_weights[i];
      Vec2 target = b.motion;
      if (cfg.background) {
        const auto bg = cfg.background->bilinear(b.center[0], b.center[1]);
        target = {target[0] - bg[0], target[1] - bg[1]};
      }
      const Vec2 center{b.center[0] * h, b.center[1] * h};
      for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
          const double gw = gaussian_weight({x * h, y * h}, center, cfg.sigma);
          if (gw == 0.0) continue;
          const auto p = g.index(x, y);
          const double a = v1[p] - target[0];
          const double c = v2[p] - target[1];
          parts.speckle += w * area * gw * (a * a + c * c);
        }
      }
    }
  }

  if (cfg.bc_mode == BcMode::dirichlet_weak) {
    const auto constraints = flow_constraints(g, cfg, bc);
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (!constraints.active[p]) continue;
      const double a = v1[p] - constraints.target[p][0];
      const double c = v2[p] - constraints.target[p][1];
      parts.boundary += h * (a * a + c * c);
    }
  }

  parts.total = parts.data + cfg.alpha * parts.smoothness + cfg.beta * parts.speckle +
                (cfg.bc_mode == BcMode::dirichlet_weak ? cfg.weak_gamma * parts.boundary : 0.0);
  return parts;
}

}  // namespace eofm
