#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eofm/boundary.hpp"
#include "eofm/elasticity.hpp"
#include "eofm/evaluation.hpp"
#include "eofm/phantom.hpp"
#include "eofm/solver.hpp"
#include "eofm/speckle_tracker.hpp"

namespace eofm {

/// SolverConfig defaults with the speckle term switched on (beta = 0.5).
inline SolverConfig pipeline_solver_defaults() {
  SolverConfig cfg;
  cfg.beta = 0.5;
  return cfg;
}

/// Everything needed to turn an image pair into a displacement estimate.
struct PipelineOptions {
  SolverConfig solver = pipeline_solver_defaults();
  int levels = 4;
  bool use_background = true;
  MaterialParams material = MaterialParams::from_young_poisson(1.0, 0.45);
  /// Physical boundary conditions of the experiment (background solve and flow Dirichlet data).
  BoundarySpec boundary = BoundarySpec::compression(8.0);
  /// How the flow solve treats traction-free sides. follow_background pins the
  /// update to zero there (u = u_bg); it acts only when a background is used.
  BoundaryKind flow_free_side = BoundaryKind::follow_background;
  DetectOptions detect;
  TrackOptions track;
  double background_tol = 1e-8;
  int background_max_iter = 20000;
};

struct PipelineResult {
  VectorField estimate;
  std::vector<Bubble> bubbles;            ///< bubbles used by the speckle term
  std::optional<VectorField> background;  ///< u_bg when used
};

/// Boundary conditions seen by the flow solver.
BoundarySpec flow_boundary(const PipelineOptions& options);

/// Detects bubbles in frame 0 and tracks them into frame 1.
std::vector<Bubble> detect_and_track(const ImagePair& pair, const DetectOptions& detect,
                                     const TrackOptions& track);

/// Tracking (when beta > 0 and no bubbles are supplied), optional background
/// solve, then coarse-to-fine estimation.
PipelineResult run_eofm(const ImagePair& pair, const PipelineOptions& options,
                        const std::optional<std::vector<Bubble>>& bubbles = std::nullopt);

/// One configuration of the five-test ablation.
struct AblationTest {
  int number = 0;
  double alpha = 0.0;
  double beta = 0.0;
  bool multiscale = false;
  bool background = false;
  BcMode bc_mode = BcMode::natural;
};

/// Tests 1..5: speckle flow (multi-scale), plain Horn-Schunck, background
/// without speckle (multi-scale), background with speckle (single level), and
/// background with speckle (multi-scale). The first two use natural boundary
/// conditions, the background tests hard Dirichlet conditions.
std::vector<AblationTest> ablation_tests(double alpha, double beta);

struct AblationRow {
  AblationTest test;
  ErrorReport report;
};

/// Runs every ablation test on one phantom; bubbles are tracked once and shared.
std::vector<AblationRow> run_ablation(const Phantom& phantom, const PipelineOptions& base);

std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string ablation_markdown(const std::vector<AblationRow>& rows);

}  // namespace eofm
