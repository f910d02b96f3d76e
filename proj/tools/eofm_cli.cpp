// eofm: command-line front end for simulation, tracking, flow estimation and
// the five-test ablation. Exit codes: 0 success, 1 numerical failure, 2 usage,
// configuration or I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eofm/config.hpp"
#include "eofm/elasticity.hpp"
#include "eofm/error.hpp"
#include "eofm/evaluation.hpp"
#include "eofm/image_io.hpp"
#include "eofm/phantom.hpp"
#include "eofm/pipeline.hpp"
#include "eofm/sparse.hpp"
#include "eofm/speckle_tracker.hpp"
#include "eofm/version.hpp"

namespace fs = std::filesystem;
using namespace eofm;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  int threads = -1;
  std::string out;
  std::string frame0;
  std::string frame1;
  std::string truth;
  std::string bubbles;
  std::string estimate;
};

ExperimentConfig load_config(const Options& o) {
  auto file = o.config.empty() ? ConfigFile::parse(default_config_text(), "<defaults>")
                               : ConfigFile::load(o.config);
  for (const auto& s : o.sets) file.set_override(s);
  if (!o.out.empty()) file.set("io.output_dir", o.out, "--out");
  if (!o.frame0.empty()) file.set("io.frame0", o.frame0, "--frame0");
  if (!o.frame1.empty()) file.set("io.frame1", o.frame1, "--frame1");
  if (!o.truth.empty()) file.set("io.truth", o.truth, "--truth");
  if (!o.bubbles.empty()) file.set("io.bubbles", o.bubbles, "--bubbles");
  if (!o.estimate.empty()) file.set("io.estimate", o.estimate, "--estimate");
  auto cfg = make_experiment_config(file);
  if (o.threads >= 0) cfg.threads = o.threads;
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  return cfg;
}

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw InvalidArgument(std::string("missing input: ") + what);
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " not found: " + path.string());
}

fs::path prepare_output_dir(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.io.output_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.io.output_dir.string() + ": " + ec.message());
  return cfg.io.output_dir;
}

// Thread count is left out on purpose: outputs must not depend on it.
void write_manifest(const fs::path& dir, const char* command, const ExperimentConfig& cfg,
                    const std::vector<std::string>& artifacts) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, cfg.config_hash);
  std::string s;
  s += "eofm_version = " + std::string(kVersion) + "\n";
  s += "command = " + std::string(command) + "\n";
  s += "config_hash = " + std::string(hash) + "\n";
  s += "seed = " + std::to_string(cfg.phantom.seed) + "\n";
  for (const auto& a : artifacts) s += "artifact = " + a + "\n";
  s += "\n[config]\n" + cfg.canonical_text;
  save_text(dir / "manifest.txt", s);
}

std::pair<double, double> symmetric_range(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  if (m == 0.0) m = 1.0;
  return {-m, m};
}

std::pair<double, double> magnitude_range(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, v);
  return {0.0, m > 0.0 ? m : 1.0};
}

void save_field_maps(const fs::path& dir, const VectorField& u, const std::string& prefix,
                     std::vector<std::string>& artifacts) {
  for (int c = 0; c < 2; ++c) {
    const auto comp = u.component_field(c);
    const auto name = prefix + "u" + std::to_string(c + 1) + ".png";
    save_colormap_png(dir / name, comp, symmetric_range(comp));
    artifacts.push_back(name);
  }
}

void save_report(const fs::path& dir, const ErrorReport& report, std::vector<std::string>& artifacts) {
  save_text(dir / "report.txt", to_key_value(report));
  save_text(dir / "report.csv", csv_header() + "\n" + csv_row(report) + "\n");
  save_colormap_png(dir / "error_u1.png", report.abs_map_u1, magnitude_range(report.abs_map_u1));
  save_colormap_png(dir / "error_u2.png", report.abs_map_u2, magnitude_range(report.abs_map_u2));
  artifacts.insert(artifacts.end(), {"report.txt", "report.csv", "error_u1.png", "error_u2.png"});
}

ImagePair load_pair(const ExperimentConfig& cfg) {
  require_file(cfg.io.frame0, "frame0");
  require_file(cfg.io.frame1, "frame1");
  return ImagePair(load_frame(cfg.io.frame0), load_frame(cfg.io.frame1));
}

int cmd_simulate(const Options& o) {
  const auto cfg = load_config(o);
  const auto dir = prepare_output_dir(cfg);
  const auto ph = generate_phantom(cfg.phantom, cfg.pipeline.material, cfg.pipeline.boundary);
  save_image(dir / "frame0.png", ph.pair.frame0);
  save_image(dir / "frame1.png", ph.pair.frame1);
  save_field(dir / "truth.fld", ph.truth);
  write_bubbles_csv(dir / "bubbles.csv", ph.seeded_bubbles);
  write_manifest(dir, "simulate", cfg, {"frame0.png", "frame1.png", "truth.fld", "bubbles.csv"});
  std::printf("simulate: wrote %s (seed %" PRIu64 ")\n", dir.c_str(), cfg.phantom.seed);
  return 0;
}

int cmd_track(const Options& o) {
  const auto cfg = load_config(o);
  const auto pair = load_pair(cfg);
  const auto dir = prepare_output_dir(cfg);
  const auto bubbles = detect_and_track(pair, cfg.pipeline.detect, cfg.pipeline.track);
  write_bubbles_csv(dir / "bubbles.csv", bubbles);
  write_manifest(dir, "track", cfg, {"bubbles.csv"});
  std::printf("track: %zu bubbles\n", bubbles.size());
  return 0;
}

int cmd_background(const Options& o) {
  const auto cfg = load_config(o);
  const auto dir = prepare_output_dir(cfg);
  const auto& po = cfg.pipeline;
  const auto bg = solve_background(cfg.phantom.geometry, po.material, po.boundary,
                                   po.background_tol, po.background_max_iter);
  std::vector<std::string> artifacts{"background.fld"};
  save_field(dir / "background.fld", bg);
  save_field_maps(dir, bg, "background_", artifacts);
  write_manifest(dir, "background", cfg, artifacts);
  std::printf("background: wrote %s\n", (dir / "background.fld").c_str());
  return 0;
}

int estimate(const Options& o, const char* command, bool background_allowed) {
  auto cfg = load_config(o);
  const auto pair = load_pair(cfg);
  std::optional<VectorField> truth;
  if (!cfg.io.truth.empty()) {
    require_file(cfg.io.truth, "truth");
    truth = load_vector_field(cfg.io.truth);
    require_same_geometry(pair.geometry(), truth->geometry(), "truth");
  }
  std::optional<std::vector<Bubble>> bubbles;
  if (!cfg.io.bubbles.empty()) {
    require_file(cfg.io.bubbles, "bubbles");
    bubbles = read_bubbles_csv(cfg.io.bubbles);
  }
  const auto dir = prepare_output_dir(cfg);
  auto opts = cfg.pipeline;
  if (!background_allowed) opts.use_background = false;
  const auto result = run_eofm(pair, opts, bubbles);

  std::vector<std::string> artifacts{"estimate.fld"};
  save_field(dir / "estimate.fld", result.estimate);
  if (!result.bubbles.empty()) {
    write_bubbles_csv(dir / "bubbles.csv", result.bubbles);
    artifacts.push_back("bubbles.csv");
  }
  save_field_maps(dir, result.estimate, "", artifacts);
  if (truth) {
    const auto report = compare(result.estimate, *truth);
    save_report(dir, report, artifacts);
    std::printf("%s: e_rel(u) = %.4f %%\n", command, report.e_rel_u);
  } else {
    std::printf("%s: no truth supplied, field written without report\n", command);
  }
  write_manifest(dir, command, cfg, artifacts);
  return 0;
}

int cmd_eval(const Options& o) {
  const auto cfg = load_config(o);
  require_file(cfg.io.estimate, "estimate");
  require_file(cfg.io.truth, "truth");
  const auto dir = prepare_output_dir(cfg);
  const auto report = compare(load_vector_field(cfg.io.estimate), load_vector_field(cfg.io.truth));
  std::vector<std::string> artifacts;
  save_report(dir, report, artifacts);
  write_manifest(dir, "eval", cfg, artifacts);
  std::fputs(to_key_value(report).c_str(), stdout);
  return 0;
}

int cmd_ablation(const Options& o) {
  const auto cfg = load_config(o);
  const auto dir = prepare_output_dir(cfg);
  const auto ph = generate_phantom(cfg.phantom, cfg.pipeline.material, cfg.pipeline.boundary);
  const auto rows = run_ablation(ph, cfg.pipeline);
  save_text(dir / "ablation.csv", ablation_csv(rows));
  const auto md = ablation_markdown(rows);
  save_text(dir / "ablation.md", md);
  write_manifest(dir, "ablation", cfg, {"ablation.csv", "ablation.md"});
  std::fputs(md.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastographic optical flow: phantom simulation, tracking and displacement estimation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Experiment config file (defaults if omitted)")->check(CLI::ExistingFile);
  app.add_option("--set", o.sets, "Override a config key: section.key=value")->take_all();
  app.add_option("--threads", o.threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output directory"); };
  auto add_frames = [&](CLI::App* sub) {
    sub->add_option("--frame0", o.frame0, "First frame (.png, .pgm or .fld)");
    sub->add_option("--frame1", o.frame1, "Second frame");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate the phantom pair, truth and seeded bubbles");
  add_out(simulate);
  auto* track = app.add_subcommand("track", "Detect bubbles in frame 0 and track them into frame 1");
  add_out(track);
  add_frames(track);
  auto* background = app.add_subcommand("background", "Solve the homogeneous background field");
  add_out(background);
  auto* flow = app.add_subcommand("flow", "Optical flow without background (plain or speckle-assisted)");
  auto* eofm_cmd = app.add_subcommand("eofm", "Full pipeline: tracking, background and coarse-to-fine flow");
  for (auto* sub : {flow, eofm_cmd}) {
    add_out(sub);
    add_frames(sub);
    sub->add_option("--truth", o.truth, "Ground-truth field for the error report");
    sub->add_option("--bubbles", o.bubbles, "Use these tracked bubbles instead of tracking");
  }
  auto* eval = app.add_subcommand("eval", "Compare an estimated field with ground truth");
  add_out(eval);
  eval->add_option("--estimate", o.estimate, "Estimated field");
  eval->add_option("--truth", o.truth, "Ground-truth field");
  auto* ablation = app.add_subcommand("ablation", "Run the five-test ablation on the configured phantom");
  add_out(ablation);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o);
    if (track->parsed()) return cmd_track(o);
    if (background->parsed()) return cmd_background(o);
    if (flow->parsed()) return estimate(o, "flow", false);
    if (eofm_cmd->parsed()) return estimate(o, "eofm", true);
    if (eval->parsed()) return cmd_eval(o);
    if (ablation->parsed()) return cmd_ablation(o);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "eofm: numerical failure: %s (residual %.3e after %d iterations)\n", e.what(),
                 e.residual(), e.iterations());
    return 1;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "eofm: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "eofm: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eofm: %s\n", e.what());
    return 1;
  }
  return 2;
}
