// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "eofm/elasticity.hpp"
#include "eofm/multiscale.hpp"
#include "eofm/phantom.hpp"
#include "eofm/pipeline.hpp"
#include "eofm/solver.hpp"
#include "eofm/sparse.hpp"
#include "support.hpp"

using namespace eofm;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// Runs a check, turning an escaped exception into a failure line.
void guarded(int id, const char* name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

struct OracleCase {
  ImagePair pair;
  std::vector<Bubble> bubbles;
  SolverConfig cfg;
  BoundarySpec bc;
};

OracleCase random_case(int w, int h, BcMode mode, bool background, std::mt19937_64& rng) {
  const GridGeometry g(w, h);
  const int n_bubbles = 1 + static_cast<int>(rng() % 4);
  OracleCase c{test::random_pair(g, rng), test::random_bubbles(g, n_bubbles, rng), SolverConfig{}, {}};
  c.cfg.alpha = test::uniform(rng, 0.2, 2.0);
  c.cfg.beta = test::uniform(rng, 0.5, 3.0);
  c.cfg.sigma = test::uniform(rng, 1.0, 3.0);
  c.cfg.bc_mode = mode;
  c.cfg.weak_gamma = 50.0;
  c.cfg.lin_tol = 1e-13;
  c.cfg.lin_max_iter = 100000;
  if (background) c.cfg.background = test::random_field(g, rng, 0.5);
  c.bc = test::compression_bc(test::uniform(rng, 0.5, 2.0),
                              background ? BoundaryKind::follow_background : BoundaryKind::traction_free);
  return c;
}

double functional_at(const OracleCase& c, const DofMap& dofs, const Eigen::VectorXd& x) {
  const std::vector<double> v(x.data(), x.data() + x.size());
  return functional_value(c.pair, c.bubbles, c.cfg, c.bc, dofs.expand(v)).total;
}

const BcMode kModes[] = {BcMode::natural, BcMode::dirichlet_hard, BcMode::dirichlet_weak};

double mean_endpoint_error(const VectorField& u, Vec2 truth) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += std::hypot(u.u1()[i] - truth[0], u.u2()[i] - truth[1]);
  return sum / static_cast<double>(u.size());
}

bool same_bytes(const VectorField& a, const VectorField& b) {
  if (!(a.geometry() == b.geometry())) return false;
  const auto n = a.size() * sizeof(double);
  return std::memcmp(a.u1().data(), b.u1().data(), n) == 0 &&
         std::memcmp(a.u2().data(), b.u2().data(), n) == 0;
}

bool same_bytes(const ScalarField& a, const ScalarField& b) {
  return a.geometry() == b.geometry() &&
         std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

// Mean |u(boundary) - u(inward neighbour)| / h over all four edges and both components.
double mean_normal_derivative(const VectorField& u) {
  const auto& g = u.geometry();
  double sum = 0.0;
  int count = 0;
  for (int c = 0; c < 2; ++c) {
    const auto& v = u.component(c);
    auto add = [&](int x, int y, int xi, int yi) {
      sum += std::abs(v[g.index(x, y)] - v[g.index(xi, yi)]) / g.spacing;
      ++count;
    };
    for (int x = 0; x < g.width; ++x) {
      add(x, 0, x, 1);
      add(x, g.height - 1, x, g.height - 2);
    }
    for (int y = 1; y < g.height - 1; ++y) {
      add(0, y, 1, y);
      add(g.width - 1, y, g.width - 2, y);
    }
  }
  return sum / count;
}

ScalarField speckle_canvas(int w, int h, std::uint64_t seed) {
  PhantomSpec spec;
  spec.geometry = GridGeometry(w, h);
  spec.inclusion_center = {w / 2.0, h / 2.0};
  spec.inclusion_radius = 4.0;
  spec.n_bubbles = 0;
  spec.compression = 0.0;
  spec.seed = seed;
  return generate_phantom(spec, MaterialParams::from_young_poisson(1.0, 0.45)).pair.frame0;
}

ScalarField bubble_canvas(int w, int h, std::uint64_t seed) {
  PhantomSpec spec;
  spec.geometry = GridGeometry(w, h);
  spec.inclusion_center = {w / 2.0, h / 2.0};
  spec.inclusion_radius = 4.0;
  spec.n_bubbles = 40;
  spec.compression = 0.0;
  spec.seed = seed;
  return generate_phantom(spec, MaterialParams::from_young_poisson(1.0, 0.45)).pair.frame0;
}

struct DefaultRun {
  Phantom phantom;
  PipelineOptions options;
  std::vector<AblationRow> rows;
  double seconds = 0.0;
};

}  // namespace

int main() {
  std::printf("eofm acceptance gate\n");
  const auto material = MaterialParams::from_young_poisson(1.0, 0.45);

  // Default 256x256 phantom and its ablation, shared by several criteria.
  DefaultRun def;
  bool have_default = false;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    def.phantom = generate_phantom(PhantomSpec{}, material);
    def.rows = run_ablation(def.phantom, def.options);
    def.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    have_default = true;
    for (const auto& r : def.rows) {
      std::printf("      Test %d: e_rel(u) = %6.2f %%  e_rel(u1) = %6.2f %%  e_rel(u2) = %6.2f %%\n",
                  r.test.number, r.report.e_rel_u, r.report.e_rel_u1, r.report.e_rel_u2);
    }
  } catch (const std::exception& e) {
    std::printf("      default ablation raised: %s\n", e.what());
  }

  // 1. Ablation ordering.
  if (have_default) {
    const auto e = [&](int k) { return def.rows[static_cast<std::size_t>(k - 1)].report.e_rel_u; };
    const bool ok = e(2) > std::max(e(1), e(3)) && std::min(e(1), e(3)) > e(4) && e(4) > e(5) &&
                    def.seconds <= 600.0;
    report(1, "ablation ordering T2 > {T1,T3} > T4 > T5 within 10 min", ok,
           fmt("T1=%.2f T2=%.2f T3=%.2f T4=%.2f T5=%.2f, %.1f s", e(1), e(2), e(3), e(4), e(5),
               def.seconds));
  } else {
    report(1, "ablation ordering T2 > {T1,T3} > T4 > T5 within 10 min", false, "ablation did not run");
  }

  // 2. Absolute levels.
  if (have_default) {
    const double t5 = def.rows[4].report.e_rel_u;
    const double t2 = def.rows[1].report.e_rel_u;
    report(2, "T5 <= 12 % and T2 >= 20 %", t5 <= 12.0 && t2 >= 20.0, fmt("T5=%.2f T2=%.2f", t5, t2));
  } else {
    report(2, "T5 <= 12 % and T2 >= 20 %", false, "ablation did not run");
  }

  // 3. Oracle equivalence on small random problems.
  guarded(3, "dense-solve and finite-difference Hessian oracles", [&] {
    std::mt19937_64 rng(2024);
    double worst_solve = 0.0;
    double worst_hessian = 0.0;
    int cases = 0;
    for (auto mode : kModes) {
      for (bool bg : {false, true}) {
        for (int size : {4, 7, 10}) {
          const int w = size;
          const int h = std::max(3, size - static_cast<int>(rng() % 3));
          const auto c = random_case(w, h, mode, bg, rng);
          const auto sys = assemble(c.pair, c.bubbles, c.cfg, c.bc);
          const Eigen::MatrixXd a = test::to_dense(sys.op);
          const Eigen::VectorXd ref = a.ldlt().solve(test::to_eigen(sys.rhs));
          const Eigen::VectorXd got = test::to_eigen(sys.dofs.restrict_to_free(solve(sys, c.cfg)));
          worst_solve = std::max(worst_solve, (got - ref).norm() / ref.norm());

          const int n = sys.op.n;
          Eigen::MatrixXd hess(n, n);
          for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
              auto at = [&](double si, double sj) {
                Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
                x[i] += si;
                x[j] += sj;
                return functional_at(c, sys.dofs, x);
              };
              hess(i, j) = hess(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / 4.0;
            }
          }
          worst_hessian = std::max(worst_hessian, (hess - a).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());
          ++cases;
        }
      }
    }
    report(3, "dense-solve and finite-difference Hessian oracles",
           worst_solve <= 1e-8 && worst_hessian <= 1e-6,
           fmt("%d cases, solve rel err %.2e (<= 1e-8), Hessian rel err %.2e (<= 1e-6)", cases,
               worst_solve, worst_hessian));
  });

  // 4. Operator properties.
  guarded(4, "symmetry, positivity and rhs Lipschitz bound", [&] {
    std::mt19937_64 rng(77);
    bool symmetric = true;
    int positive = 0;
    int probes = 0;
    double worst_ratio = 0.0;  // Lipschitz constant over its spectral bound
    double worst_c = 0.0;
    bool finite = true;
    for (auto mode : kModes) {
      const auto c = random_case(10, 9, mode, mode == BcMode::dirichlet_hard, rng);
      const auto sys = assemble(c.pair, c.bubbles, c.cfg, c.bc);
      symmetric = symmetric && sys.op.is_exactly_symmetric();
      std::vector<double> v(static_cast<std::size_t>(sys.op.n));
      std::vector<double> av(v.size());
      for (int k = 0; k < 100; ++k) {
        for (auto& x : v) x = test::uniform(rng, -1, 1);
        sys.op.multiply(v, av);
        positive += deterministic_dot(v, av) > 0.0;
        ++probes;
      }
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(test::to_dense(sys.op));
      const double bound = 1.0 / eig.eigenvalues().minCoeff();
      const auto base = sys.dofs.restrict_to_free(solve(sys, c.cfg));
      for (int k = 0; k < 20; ++k) {
        auto perturbed = sys;
        std::vector<double> delta(sys.rhs.size());
        for (auto& d : delta) d = test::uniform(rng, -1.0, 1.0) * std::pow(10.0, -static_cast<double>(k % 5));
        for (std::size_t i = 0; i < delta.size(); ++i) perturbed.rhs[i] += delta[i];
        const auto moved = sys.dofs.restrict_to_free(solve(perturbed, c.cfg));
        double num = 0.0;
        for (std::size_t i = 0; i < moved.size(); ++i) num += (moved[i] - base[i]) * (moved[i] - base[i]);
        const double ratio = std::sqrt(num) / std::sqrt(deterministic_dot(delta, delta));
        finite = finite && std::isfinite(ratio);
        worst_c = std::max(worst_c, ratio);
        worst_ratio = std::max(worst_ratio, ratio / bound);
      }
    }
    // PCG stops at a relative residual, so allow a small slack over 1 / lambda_min.
    const bool ok = symmetric && positive == probes && finite && worst_ratio <= 1.0 + 1e-4;
    report(4, "symmetry, positivity and rhs Lipschitz bound", ok,
           fmt("symmetric=%s, v'Av>0 in %d/%d, C=%.3g (%.4f of 1/lambda_min)", symmetric ? "yes" : "no",
               positive, probes, worst_c, worst_ratio));
  });

  // 5. Boundary behaviour on the default-phantom estimates.
  guarded(5, "natural and hard Dirichlet boundary behaviour", [&] {
    if (!have_default) throw std::runtime_error("ablation did not run");
    double natural_worst = 0.0;
    for (int number : {1, 2}) {
      auto opts = def.options;
      opts.solver.bc_mode = BcMode::natural;
      opts.solver.beta = number == 1 ? def.options.solver.beta : 0.0;
      opts.use_background = false;
      if (number == 2) opts.levels = 1;
      const auto u = run_eofm(def.phantom.pair, opts).estimate;
      natural_worst = std::max(natural_worst, mean_normal_derivative(u));
    }
    const auto bc = def.options.boundary;
    const auto labels = bc.label(def.phantom.pair.geometry());
    const auto u5 = run_eofm(def.phantom.pair, def.options).estimate;
    const auto& g = u5.geometry();
    double dirichlet_dev = 0.0;
    int pinned = 0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (!labels.is_dirichlet(p)) continue;
      ++pinned;
      dirichlet_dev = std::max({dirichlet_dev, std::abs(u5.u1()[p] - labels.value[p][0]),
                                std::abs(u5.u2()[p] - labels.value[p][1])});
    }
    const bool ok = natural_worst <= 1e-3 && dirichlet_dev == 0.0 && pinned > 0;
    report(5, "natural and hard Dirichlet boundary behaviour", ok,
           fmt("mean |du/dn| on free edges %.2e (<= 1e-3), max |u - g| on %d Dirichlet pixels %.1e",
               natural_worst, pinned, dirichlet_dev));
  });

  // 6. Coarse-to-fine recovery of a (6, 0) translation.
  guarded(6, "translation (6,0): multi-scale < 0.1 px, single level > 1 px", [&] {
    const auto canvas = speckle_canvas(140, 128, 9);
    const auto pair = test::translated_pair(canvas, 128, 128, 6, 0);
    SolverConfig cfg;
    cfg.bc_mode = BcMode::natural;
    const auto multi = run_coarse_to_fine(build_pyramid(pair, {}, 4), cfg, BoundarySpec::natural(), std::nullopt);
    const auto single = run_coarse_to_fine(build_pyramid(pair, {}, 1), cfg, BoundarySpec::natural(), std::nullopt);
    const double em = mean_endpoint_error(multi, {6.0, 0.0});
    const double es = mean_endpoint_error(single, {6.0, 0.0});
    report(6, "translation (6,0): multi-scale < 0.1 px, single level > 1 px", em < 0.1 && es > 1.0,
           fmt("4 levels %.4f px, 1 level %.4f px", em, es));
  });

  // 7. Speckle tracker.
  guarded(7, "tracker accuracy on the phantom and exactness under integer shifts", [&] {
    if (!have_default) throw std::runtime_error("ablation did not run");
    const auto tracked = detect_and_track(def.phantom.pair, def.options.detect, def.options.track);
    int close = 0;
    for (const auto& b : tracked) {
      const auto t = def.phantom.truth.bilinear(b.center[0], b.center[1]);
      close += std::hypot(b.motion[0] - t[0], b.motion[1] - t[1]) <= 0.5;
    }
    const double frac = tracked.empty() ? 0.0 : static_cast<double>(close) / tracked.size();

    int exact = 0;
    int total = 0;
    const int shifts[][2] = {{3, 2}, {-4, 5}, {0, -7}};
    for (const auto& s : shifts) {
      const auto canvas = bubble_canvas(160, 160, 31);
      const auto pair = test::translated_pair(canvas, 140, 140, s[0], s[1]);
      for (const auto& b : detect_and_track(pair, def.options.detect, def.options.track)) {
        ++total;
        exact += b.motion == Vec2{double(s[0]), double(s[1])};
      }
    }
    report(7, "tracker accuracy on the phantom and exactness under integer shifts",
           frac >= 0.85 && total > 0 && exact == total,
           fmt("%d/%zu within 0.5 px (%.1f %%), integer shifts exact %d/%d", close, tracked.size(),
               100.0 * frac, exact, total));
  });

  // 8. Elasticity.
  guarded(8, "elasticity: linear strip, zero load, dense oracle", [&] {
    const GridGeometry strip(24, 61);
    const double c = 3.0;
    const auto u = solve_background(strip, MaterialParams{0.0, 1.0}, test::compression_bc(c), 1e-12, 50000);
    const int h = strip.height - 1;
    double worst_rel = 0.0;
    for (int y = h / 3; y <= 2 * h / 3; ++y) {
      const double expected = -c * y / h;
      for (int x = 0; x < strip.width; ++x) {
        worst_rel = std::max(worst_rel, std::abs(u.at(x, y)[1] - expected) / std::abs(expected));
      }
    }

    const auto zero = solve_background(GridGeometry(20, 16), material, test::compression_bc(0.0));
    double zero_max = 0.0;
    for (double v : zero.u1()) zero_max = std::max(zero_max, std::abs(v));
    for (double v : zero.u2()) zero_max = std::max(zero_max, std::abs(v));

    std::mt19937_64 rng(21);
    const GridGeometry g(16, 16);
    double worst_dense = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const MaterialParams mat{test::uniform(rng, 0.0, 3.0), test::uniform(rng, 0.2, 2.0)};
      BoundarySpec bc;
      bc.add({Edge::top, 0, -1, BoundaryKind::dirichlet, {test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)}});
      bc.add({Edge::bottom, 0, -1, BoundaryKind::dirichlet, {test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)}});
      ScalarField factor(g);
      for (auto& v : factor.values()) v = test::uniform(rng, 0.5, 4.0);
      const auto sys = assemble_elasticity(g, mat, bc, &factor);
      const Eigen::VectorXd ref = test::to_dense(sys.stiffness).ldlt().solve(test::to_eigen(sys.rhs));
      const Eigen::VectorXd got =
          test::to_eigen(sys.dofs.restrict_to_free(solve_elasticity(g, mat, bc, &factor, 1e-13, 100000)));
      worst_dense = std::max(worst_dense, (got - ref).norm() / ref.norm());
    }
    report(8, "elasticity: linear strip, zero load, dense oracle",
           worst_rel <= 0.02 && zero_max == 0.0 && worst_dense <= 1e-8,
           fmt("strip dev %.3f %% (<= 2 %%), zero-load max %.1e, dense rel err %.2e (<= 1e-8)",
               100.0 * worst_rel, zero_max, worst_dense));
  });

  // 9. Determinism across repeated runs and thread counts.
  guarded(9, "byte-identical results across runs and thread counts", [&] {
    PhantomSpec spec;
    spec.geometry = GridGeometry(128, 128);
    spec.inclusion_center = {63.5, 63.5};
    spec.inclusion_radius = 20.0;
    spec.n_bubbles = 60;
    spec.compression = 4.0;
    PipelineOptions opts;
    opts.boundary = BoundarySpec::compression(4.0);
    auto run_once = [&](int threads) {
      set_thread_count(threads);
      const auto ph = generate_phantom(spec, material);
      auto result = run_eofm(ph.pair, opts);
      return std::make_pair(ph, std::move(result));
    };
    const auto ref = run_once(1);
    bool identical = true;
    int runs = 0;
    for (int threads : {1, 2, 4, 3}) {
      const auto other = run_once(threads);
      ++runs;
      identical = identical && same_bytes(ref.first.pair.frame0, other.first.pair.frame0) &&
                  same_bytes(ref.first.pair.frame1, other.first.pair.frame1) &&
                  same_bytes(ref.first.truth, other.first.truth) &&
                  same_bytes(ref.second.estimate, other.second.estimate) &&
                  ref.second.bubbles.size() == other.second.bubbles.size();
      for (std::size_t i = 0; identical && i < ref.second.bubbles.size(); ++i) {
        identical = std::memcmp(&ref.second.bubbles[i].motion, &other.second.bubbles[i].motion,
                                sizeof(Vec2)) == 0;
      }
    }
    set_thread_count(0);
    report(9, "byte-identical results across runs and thread counts", identical,
           fmt("%d reruns with 1-4 threads compared against a 1-thread reference", runs));
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
