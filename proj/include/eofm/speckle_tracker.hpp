#pragma once

#include <filesystem>
#include <vector>

#include "eofm/derivatives.hpp"
#include "eofm/field.hpp"

namespace eofm {

/// A tracked speckle formation: center of mass in frame 0 and its motion into frame 1.
struct Bubble {
  Vec2 center{0.0, 0.0};
  Vec2 motion{0.0, 0.0};
  double weight = 1.0;       ///< per-bubble penalty weight
  double match_score = 0.0;  ///< peak normalized cross-correlation
};

struct DetectOptions {
  int min_area = 9;
  int max_area = 100;
  double threshold = 0.5;  ///< fraction of the image's [min, max] intensity range
};

struct TrackOptions {
  int patch_radius = 10;
  int search_radius = 15;
  double accept_score = 0.6;
};

/// Binarizes at min + threshold * (max - min), labels 8-connected components in raster order and
/// returns the intensity-weighted centroids of components whose area lies in
/// [min_area, max_area].
std::vector<Bubble> detect_bubbles(const ScalarField& image, int min_area, int max_area,
                                   double threshold);
inline std::vector<Bubble> detect_bubbles(const ScalarField& image, const DetectOptions& o = {}) {
  return detect_bubbles(image, o.min_area, o.max_area, o.threshold);
}

/// Exhaustive normalized cross-correlation block matching with per-axis
/// parabolic subpixel refinement; order is preserved. A bubble is dropped when
///  - its patch leaves the image,
///  - the peak score is below `accept_score`,
///  - an imperfect peak borders an offset that was not evaluated (search window
///    edge or image border).
std::vector<Bubble> track_bubbles(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                                  int patch_radius, int search_radius, double accept_score = 0.6);
inline std::vector<Bubble> track_bubbles(const ImagePair& pair, const std::vector<Bubble>& bubbles,
                                         const TrackOptions& o) {
  return track_bubbles(pair, bubbles, o.patch_radius, o.search_radius, o.accept_score);
}

/// Normalized cross-correlation of two equally sized patches of `a` and `b`
/// centered at integer pixels; 0 when either patch is constant.
double normalized_cross_correlation(const ScalarField& a, int ax, int ay, const ScalarField& b,
                                    int bx, int by, int radius);

/// CSV with header `id,cx,cy,ux,uy,weight,score`.
void write_bubbles_csv(const std::filesystem::path& path, const std::vector<Bubble>& bubbles);
std::vector<Bubble> read_bubbles_csv(const std::filesystem::path& path);

}  // namespace eofm
