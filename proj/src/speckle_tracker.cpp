#include "eofm/speckle_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "eofm/error.hpp"
#include "eofm/image_io.hpp"

namespace eofm {

std::vector<Bubble> detect_bubbles(const ScalarField& image, int min_area, int max_area,
                                   double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("detect_bubbles: threshold must lie in (0, 1)");
  }
  if (min_area <= 0 || min_area > max_area) {
    throw InvalidArgument("detect_bubbles: need 0 < min_area <= max_area");
  }
  const auto& g = image.geometry();
  const auto [lo, hi] = std::minmax_element(image.values().begin(), image.values().end());
  const double level = *lo + threshold * (*hi - *lo);
  std::vector<char> visited(g.size(), 0);
  std::vector<Bubble> out;
  std::vector<std::pair<int, int>> stack;
  std::vector<std::pair<int, int>> component;

  for (int y0 = 0; y0 < g.height; ++y0) {
    for (int x0 = 0; x0 < g.width; ++x0) {
      const auto seed = g.index(x0, y0);
      if (visited[seed] || !(image[seed] > level)) continue;
      component.clear();
      stack.assign(1, {x0, y0});
      visited[seed] = 1;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        component.emplace_back(x, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (!g.contains(nx, ny)) continue;
            const auto ni = g.index(nx, ny);
            if (visited[ni] || !(image[ni] > level)) continue;
            visited[ni] = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
      const auto area = static_cast<int>(component.size());
      if (area < min_area || area > max_area) continue;
      // Sum in raster order so the centroid does not depend on the flood-fill order.
      std::sort(component.begin(), component.end(),
                [](auto a, auto b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });
      double mass = 0.0;
      double mx = 0.0;
      double my = 0.0;
      for (const auto& [x, y] : component) {
        const double w = image(x, y);
        mass += w;
        mx += w * x;
        my += w * y;
      }
      Bubble b;
      b.center = {mx / mass, my / mass};
      out.push_back(b);
    }
  }
  return out;
}

double normalized_cross_correlation(const ScalarField& a, int ax, int ay, const ScalarField& b,
                                    int bx, int by, int radius) {
  const int side = 2 * radius + 1;
  const double count = static_cast<double>(side) * side;
  double sa = 0.0;
  double sb = 0.0;
  bool flat_a = true;
  bool flat_b = true;
  const double a0 = a(ax, ay);
  const double b0 = b(bx, by);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double va = a(ax + dx, ay + dy);
      const double vb = b(bx + dx, by + dy);
      sa += va;
      sb += vb;
      flat_a = flat_a && va == a0;
      flat_b = flat_b && vb == b0;
    }
  }
  if (flat_a || flat_b) return 0.0;
  const double ma = sa / count;
  const double mb = sb / count;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double da = a(ax + dx, ay + dy) - ma;
      const double db = b(bx + dx, by + dy) - mb;
      cov += da * db;
      va += da * da;
      vb += db * db;
    }
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

namespace {

bool patch_inside(const GridGeometry& g, int cx, int cy, int r) {
  return cx - r >= 0 && cy - r >= 0 && cx + r < g.width && cy + r < g.height;
}

// Vertex of the parabola through (-1, lo), (0, mid), (1, hi), limited to half a pixel.
double parabolic_offset(double lo, double mid, double hi) {
  const double curvature = lo - 2.0 * mid + hi;
  if (!(curvature < 0.0)) return 0.0;
  return std::clamp(0.5 * (lo - hi) / curvature, -0.5, 0.5);
}

std::optional<Bubble> track_one(const ImagePair& pair, const Bubble& bubble, int r, int s,
                                double accept) {
  const auto& g = pair.geometry();
  const int cx = static_cast<int>(std::lround(bubble.center[0]));
  const int cy = static_cast<int>(std::lround(bubble.center[1]));
  if (!patch_inside(g, cx, cy, r)) return std::nullopt;

  const int side = 2 * s + 1;
  std::vector<double> scores(static_cast<std::size_t>(side) * side,
                             -std::numeric_limits<double>::infinity());
  auto score_at = [&](int dx, int dy) -> double& {
    return scores[static_cast<std::size_t>(dy + s) * side + (dx + s)];
  };
  double best = -std::numeric_limits<double>::infinity();
  int best_dx = 0;
  int best_dy = 0;
  // Axial offset outermost: ties resolve to the smallest (axial, lateral) offset.
  for (int dy = -s; dy <= s; ++dy) {
    for (int dx = -s; dx <= s; ++dx) {
      if (!patch_inside(g, cx + dx, cy + dy, r)) continue;
      const double v = normalized_cross_correlation(pair.frame0, cx, cy, pair.frame1, cx + dx,
                                                    cy + dy, r);
      score_at(dx, dy) = v;
      if (v > best) {
        best = v;
        best_dx = dx;
        best_dy = dy;
      }
    }
  }
  if (!(best >= accept)) return std::nullopt;

  double fx = 0.0;
  double fy = 0.0;
  // A perfect match is an exact integer shift; refinement would only add bias.
  if (best < 1.0 - 1e-12) {
    // Next to an unevaluated offset the peak may be the flank of one outside the window.
    for (const auto& [dx, dy] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}}) {
      const int nx = best_dx + dx;
      const int ny = best_dy + dy;
      if (nx < -s || nx > s || ny < -s || ny > s || !std::isfinite(score_at(nx, ny))) return std::nullopt;
    }
    fx = parabolic_offset(score_at(best_dx - 1, best_dy), best, score_at(best_dx + 1, best_dy));
    fy = parabolic_offset(score_at(best_dx, best_dy - 1), best, score_at(best_dx, best_dy + 1));
  }
  Bubble out = bubble;
  out.motion = {(best_dx + fx) * g.spacing, (best_dy + fy) * g.spacing};
  out.match_score = best;
  return out;
}

}  // namespace

std::vector<Bubble> track_bubbles(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                                  int patch_radius, int search_radius, double accept_score) {
  if (patch_radius < 2) throw InvalidArgument("track_bubbles: patch_radius must be >= 2");
  if (search_radius < 1) throw InvalidArgument("track_bubbles: search_radius must be >= 1");
  std::vector<std::optional<Bubble>> tracked(bubbles.size());
  const auto count = static_cast<std::int64_t>(bubbles.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    tracked[i] = track_one(pair, bubbles[i], patch_radius, search_radius, accept_score);
  }
  std::vector<Bubble> out;
  for (auto& t : tracked) {
    if (t) out.push_back(*t);
  }
  return out;
}

void write_bubbles_csv(const std::filesystem::path& path, const std::vector<Bubble>& bubbles) {
  std::ostringstream os;
  os << "id,cx,cy,ux,uy,weight,score\n";
  char line[256];
  for (std::size_t i = 0; i < bubbles.size(); ++i) {
    const auto& b = bubbles[i];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, b.center[0],
                  b.center[1], b.motion[0], b.motion[1], b.weight, b.match_score);
    os << line;
  }
  save_text(path, os.str());
}

std::vector<Bubble> read_bubbles_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,cx,cy,ux,uy,weight,score", 0) != 0) {
    throw IoError(path.string() + ": missing bubbles CSV header");
  }
  std::vector<Bubble> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
      }
    }
    if (cells.size() != 7) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 7 columns");
    }
    Bubble b;
    b.center = {cells[1], cells[2]};
    b.motion = {cells[3], cells[4]};
    b.weight = cells[5];
    b.match_score = cells[6];
    if (!(b.weight > 0.0)) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": weight must be positive");
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace eofm
