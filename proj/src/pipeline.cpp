#include "eofm/pipeline.hpp"

#include <cmath>
#include <cstdio>

#include "eofm/multiscale.hpp"

namespace eofm {

BoundarySpec flow_boundary(const PipelineOptions& options) {
  return options.boundary.with_kind_replaced(BoundaryKind::traction_free, options.flow_free_side);
}

std::vector<Bubble> detect_and_track(const ImagePair& pair, const DetectOptions& detect,
                                     const TrackOptions& track) {
  return track_bubbles(pair, detect_bubbles(pair.frame0, detect), track);
}

PipelineResult run_eofm(const ImagePair& pair, const PipelineOptions& options,
                        const std::optional<std::vector<Bubble>>& bubbles) {
  options.solver.validate();
  PipelineResult result;
  if (bubbles) {
    result.bubbles = *bubbles;
  } else if (options.solver.beta > 0.0) {
    result.bubbles = detect_and_track(pair, options.detect, options.track);
  }
  if (options.use_background) {
    result.background = solve_background(pair.geometry(), options.material, options.boundary,
                                         options.background_tol, options.background_max_iter);
  }
  SolverConfig cfg = options.solver;
  cfg.background.reset();
  const auto levels = build_pyramid(pair, result.bubbles, options.levels);
  result.estimate = run_coarse_to_fine(levels, cfg, flow_boundary(options), result.background);
  return result;
}

std::vector<AblationTest> ablation_tests(double alpha, double beta) {
  return {
      {1, alpha, beta, true, false, BcMode::natural},
      {2, alpha, 0.0, false, false, BcMode::natural},
      {3, alpha, 0.0, true, true, BcMode::dirichlet_hard},
      {4, alpha, beta, false, true, BcMode::dirichlet_hard},
      {5, alpha, beta, true, true, BcMode::dirichlet_hard},
  };
}

std::vector<AblationRow> run_ablation(const Phantom& phantom, const PipelineOptions& base) {
  std::vector<Bubble> tracked;
  if (base.solver.beta > 0.0) tracked = detect_and_track(phantom.pair, base.detect, base.track);
  std::vector<AblationRow> rows;
  for (const auto& test : ablation_tests(base.solver.alpha, base.solver.beta)) {
    PipelineOptions opts = base;
    opts.solver.alpha = test.alpha;
    opts.solver.beta = test.beta;
    opts.solver.bc_mode = test.bc_mode;
    opts.use_background = test.background;
    if (!test.multiscale) opts.levels = 1;
    const auto bubbles = test.beta > 0.0 ? tracked : std::vector<Bubble>{};
    const auto result = run_eofm(phantom.pair, opts, bubbles);
    rows.push_back({test, compare(result.estimate, phantom.truth)});
  }
  return rows;
}

namespace {
std::string number(double v, const char* format = "%.2f") {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}
}  // namespace

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string s = "test,alpha,beta,multiscale,background,bc_mode,e_rel_u,e_rel_u1,e_rel_u2\n";
  for (const auto& r : rows) {
    s += std::to_string(r.test.number) + "," + number(r.test.alpha, "%g") + "," +
         number(r.test.beta, "%g") + "," + (r.test.multiscale ? "1" : "0") + "," +
         (r.test.background ? "1" : "0") + "," + to_string(r.test.bc_mode) + "," +
         number(r.report.e_rel_u, "%.4f") + "," + number(r.report.e_rel_u1, "%.4f") + "," +
         number(r.report.e_rel_u2, "%.4f") + "\n";
  }
  return s;
}

std::string ablation_markdown(const std::vector<AblationRow>& rows) {
  std::string s =
      "| Test | alpha | beta | Multi-scale | Background | e_rel(u) % | e_rel(u1) % | e_rel(u2) % |\n"
      "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    s += "| " + std::to_string(r.test.number) + " | " + number(r.test.alpha, "%g") + " | " +
         number(r.test.beta, "%g") + " | " + (r.test.multiscale ? "yes" : "no") + " | " +
         (r.test.background ? "yes" : "no") + " | " + number(r.report.e_rel_u) + " | " +
         number(r.report.e_rel_u1) + " | " + number(r.report.e_rel_u2) + " |\n";
  }
  return s;
}

}  // namespace eofm
