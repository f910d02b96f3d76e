#include "eofm/config.hpp"

#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace eofm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Typed access to a ConfigFile; remembers which keys were read so leftovers
// can be reported as unknown.
class Reader {
 public:
  explicit Reader(const ConfigFile& file) : file_(file) {}

  template <typename T, typename Check>
  void read(const std::string& key, T& target, Check&& check, const char* requirement) {
    consumed_.insert(key);
    const auto* e = file_.find(key);
    if (!e) return;
    T value{};
    if (!convert(e->value, value)) fail(*e, key, std::string("cannot parse '") + e->value + "'");
    if (!check(value)) fail(*e, key, std::string("must be ") + requirement);
    target = value;
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    read(key, target, [](const T&) { return true; }, "");
  }

  void read_with(const std::string& key, const std::function<void(const std::string&)>& apply) {
    consumed_.insert(key);
    const auto* e = file_.find(key);
    if (!e) return;
    try {
      apply(e->value);
    } catch (const InvalidArgument& ex) {
      fail(*e, key, ex.what());
    }
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : file_.entries()) {
      if (!consumed_.count(key)) throw ConfigError(entry.origin + ": unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const ConfigFile::Entry& e, const std::string& key,
                         const std::string& message) const {
    throw ConfigError(e.origin + ": " + key + " " + message);
  }

  const ConfigFile& file() const { return file_; }

 private:
  static bool convert(const std::string& text, double& out) {
    char* end = nullptr;
    errno = 0;
    out = std::strtod(text.c_str(), &end);
    return errno == 0 && end && *end == '\0' && !text.empty() && std::isfinite(out);
  }
  static bool convert(const std::string& text, int& out) {
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (errno != 0 || !end || *end != '\0' || text.empty() || v < INT32_MIN || v > INT32_MAX) return false;
    out = static_cast<int>(v);
    return true;
  }
  static bool convert(const std::string& text, std::uint64_t& out) {
    char* end = nullptr;
    errno = 0;
    out = std::strtoull(text.c_str(), &end, 10);
    return errno == 0 && end && *end == '\0' && !text.empty() && text[0] != '-';
  }
  static bool convert(const std::string& text, bool& out) {
    if (text == "true" || text == "yes" || text == "1" || text == "on") {
      out = true;
      return true;
    }
    if (text == "false" || text == "no" || text == "0" || text == "off") {
      out = false;
      return true;
    }
    return false;
  }
  static bool convert(const std::string& text, std::string& out) {
    out = text;
    return true;
  }
  static bool convert(const std::string& text, std::filesystem::path& out) {
    out = text;
    return true;
  }

  const ConfigFile& file_;
  std::set<std::string> consumed_;
};

auto positive = [](auto v) { return v > 0; };
auto non_negative = [](auto v) { return v >= 0; };

BoundarySegment edge_condition(Edge edge, const std::string& kind, double compression) {
  BoundarySegment s;
  s.edge = edge;
  if (kind == "fixed") {
    s.kind = BoundaryKind::dirichlet;
  } else if (kind == "compressed") {
    s.kind = BoundaryKind::dirichlet;
    switch (edge) {
      case Edge::top: s.value = {0.0, compression}; break;
      case Edge::bottom: s.value = {0.0, -compression}; break;
      case Edge::left: s.value = {compression, 0.0}; break;
      case Edge::right: s.value = {-compression, 0.0}; break;
    }
  } else if (kind == "free" || kind == "traction_free") {
    s.kind = BoundaryKind::traction_free;
  } else if (kind == "natural") {
    s.kind = BoundaryKind::natural;
  } else {
    throw InvalidArgument("edge condition must be fixed, compressed, free or natural, got '" +
                          kind + "'");
  }
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, const std::string& source) {
  ConfigFile cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string origin = source + ":" + std::to_string(line_no);
    auto line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError(origin + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(origin + ": key outside of a [section]");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ": empty key");
    const auto full = section + "." + key;
    if (cfg.entries_.count(full)) throw ConfigError(origin + ": duplicate key '" + full + "'");
    cfg.entries_[full] = {value, origin};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void ConfigFile::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto key = trim(assignment.substr(0, eq));
  if (eq == std::string::npos || key.find('.') == std::string::npos || key.front() == '.') {
    throw ConfigError("--set " + assignment + ": expected section.key=value");
  }
  set(key, trim(assignment.substr(eq + 1)), "--set " + key);
}

void ConfigFile::set(const std::string& key, const std::string& value, const std::string& origin) {
  entries_[key] = {value, origin};
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string ConfigFile::canonical() const {
  std::string s;
  for (const auto& [key, e] : entries_) s += key + " = " + e.value + "\n";
  return s;
}

std::uint64_t ConfigFile::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig make_experiment_config(const ConfigFile& file) {
  Reader r(file);
  ExperimentConfig cfg;
  auto& ph = cfg.phantom;
  auto& po = cfg.pipeline;

  int width = ph.geometry.width;
  int height = ph.geometry.height;
  double spacing = ph.geometry.spacing;
  r.read("phantom.width", width, [](int v) { return v >= 2; }, ">= 2");
  r.read("phantom.height", height, [](int v) { return v >= 2; }, ">= 2");
  r.read("phantom.spacing", spacing, positive, "> 0");
  ph.geometry = GridGeometry(width, height, spacing);
  ph.inclusion_center = {(width - 1) / 2.0, (height - 1) / 2.0};
  r.read("phantom.inclusion_cx", ph.inclusion_center[0]);
  r.read("phantom.inclusion_cy", ph.inclusion_center[1]);
  r.read("phantom.inclusion_radius", ph.inclusion_radius, positive, "> 0");
  r.read("phantom.stiffness_ratio", ph.stiffness_ratio, positive, "> 0");
  r.read("phantom.n_bubbles", ph.n_bubbles, non_negative, ">= 0");
  r.read("phantom.bubble_radius_min", ph.bubble_radius_range.first, positive, "> 0");
  r.read("phantom.bubble_radius_max", ph.bubble_radius_range.second, positive, "> 0");
  r.read("phantom.speckle_mean", ph.speckle_mean, [](double v) { return v >= 0 && v <= 1; }, "in [0, 1]");
  r.read("phantom.speckle_contrast", ph.speckle_contrast, non_negative, ">= 0");
  r.read("phantom.speckle_blur", ph.speckle_blur, non_negative, ">= 0");
  r.read("phantom.bubble_intensity", ph.bubble_intensity, [](double v) { return v > 0 && v <= 1; }, "in (0, 1]");
  r.read("phantom.solver_tol", ph.solver_tol, positive, "> 0");
  r.read("phantom.solver_max_iter", ph.solver_max_iter, positive, "> 0");
  r.read("run.seed", ph.seed);
  r.read("run.threads", cfg.threads, non_negative, ">= 0");

  double young = 1.0;
  double poisson = 0.45;
  r.read("material.young", young, positive, "> 0");
  r.read("material.poisson", poisson, [](double v) { return v >= 0 && v < 0.5; }, "in [0, 0.5)");
  po.material = MaterialParams::from_young_poisson(young, poisson);

  double compression = ph.compression;
  r.read("boundary.compression", compression);
  ph.compression = compression;
  std::string edges[4] = {"fixed", "compressed", "free", "free"};
  const char* edge_keys[4] = {"boundary.top", "boundary.bottom", "boundary.left", "boundary.right"};
  const Edge edge_ids[4] = {Edge::top, Edge::bottom, Edge::left, Edge::right};
  BoundarySpec boundary;
  for (int i = 0; i < 4; ++i) {
    r.read(edge_keys[i], edges[i]);
    r.read_with(edge_keys[i], [&](const std::string& v) { edge_condition(edge_ids[i], v, 0.0); });
    boundary.add(edge_condition(edge_ids[i], edges[i], compression));
  }
  po.boundary = boundary;
  r.read_with("boundary.flow_free_side", [&](const std::string& v) {
    const auto kind = parse_boundary_kind(v);
    if (kind != BoundaryKind::natural && kind != BoundaryKind::follow_background) {
      throw InvalidArgument("must be natural or follow_background");
    }
    po.flow_free_side = kind;
  });

  auto& sc = po.solver;
  r.read("solver.alpha", sc.alpha, positive, "> 0");
  r.read("solver.beta", sc.beta, non_negative, ">= 0");
  r.read("solver.sigma", sc.sigma, positive, "> 0");
  r.read_with("solver.bc_mode", [&](const std::string& v) { sc.bc_mode = parse_bc_mode(v); });
  r.read("solver.weak_gamma", sc.weak_gamma, positive, "> 0");
  r.read("solver.lin_tol", sc.lin_tol, positive, "> 0");
  r.read("solver.lin_max_iter", sc.lin_max_iter, positive, "> 0");
  r.read("solver.levels", po.levels, [](int v) { return v >= 1; }, ">= 1");
  r.read("solver.background", po.use_background);
  r.read("solver.background_tol", po.background_tol, positive, "> 0");
  r.read("solver.background_max_iter", po.background_max_iter, positive, "> 0");

  auto& det = po.detect;
  auto& trk = po.track;
  r.read("tracker.threshold", det.threshold, [](double v) { return v > 0 && v < 1; }, "in (0, 1)");
  r.read("tracker.min_area", det.min_area, positive, "> 0");
  r.read("tracker.max_area", det.max_area, positive, "> 0");
  r.read("tracker.patch_radius", trk.patch_radius, [](int v) { return v >= 2; }, ">= 2");
  r.read("tracker.search_radius", trk.search_radius, [](int v) { return v >= 1; }, ">= 1");
  r.read("tracker.accept_score", trk.accept_score, [](double v) { return v >= -1 && v <= 1; }, "in [-1, 1]");

  r.read("io.output_dir", cfg.io.output_dir);
  r.read("io.frame0", cfg.io.frame0);
  r.read("io.frame1", cfg.io.frame1);
  r.read("io.truth", cfg.io.truth);
  r.read("io.bubbles", cfg.io.bubbles);
  r.read("io.estimate", cfg.io.estimate);

  r.reject_unknown();

  // Cross-field constraints, reported against the most relevant key.
  auto origin_of = [&](const std::string& key) {
    const auto* e = file.find(key);
    return e ? e->origin : std::string("<defaults>");
  };
  if (det.min_area > det.max_area) {
    throw ConfigError(origin_of("tracker.min_area") + ": tracker.min_area exceeds tracker.max_area");
  }
  if (ph.bubble_radius_range.second < ph.bubble_radius_range.first) {
    throw ConfigError(origin_of("phantom.bubble_radius_max") +
                      ": phantom.bubble_radius_max is below phantom.bubble_radius_min");
  }
  try {
    ph.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(origin_of("phantom.inclusion_radius") + ": " + e.what());
  }

  cfg.canonical_text = file.canonical();
  cfg.config_hash = file.hash();
  return cfg;
}

std::string default_config_text() {
  return R"(# eofm experiment configuration (all values shown are the defaults)
[phantom]
width = 256
height = 256
spacing = 1
# inclusion_cx / inclusion_cy default to the image center
inclusion_radius = 40
stiffness_ratio = 5
n_bubbles = 200
bubble_radius_min = 2
bubble_radius_max = 4
speckle_mean = 0.2
speckle_contrast = 0.015
speckle_blur = 1
bubble_intensity = 0.3
solver_tol = 1e-10
solver_max_iter = 50000

[material]
young = 1
poisson = 0.45

[boundary]
# fixed | compressed | free | natural
top = fixed
bottom = compressed
left = free
right = free
compression = 8
# natural | follow_background
flow_free_side = follow_background

[solver]
alpha = 0.8
beta = 0.5
sigma = 5
bc_mode = dirichlet_hard
weak_gamma = 1000
lin_tol = 1e-8
lin_max_iter = 10000
levels = 4
background = true
background_tol = 1e-8
background_max_iter = 20000

[tracker]
threshold = 0.5
min_area = 9
max_area = 100
patch_radius = 10
search_radius = 15
accept_score = 0.6

[io]
output_dir = eofm_out

[run]
seed = 1
threads = 0
)";
}

}  // namespace eofm
