#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>

#include "eofm/field.hpp"

namespace eofm {

/// On-disk field header. Little-endian; followed by width*height*components
/// float32 values, component-planar (all u1, then all u2).
struct FieldFileHeader {
  static constexpr char kMagic[8] = {'E', 'O', 'F', 'M', 'F', 'L', 'D', '1'};
  static constexpr std::size_t kBytes = 20;

  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t components = 0;
};

/// 8/16-bit grayscale PNG or binary PGM (P5), rescaled to [0, 1] by the format maximum.
ScalarField load_image(const std::filesystem::path& path);

/// Writes a grayscale PNG (.png) or binary PGM (.pgm). Values are clamped to
/// [0, 1] and quantized to `bit_depth` (8 or 16) bits.
void save_image(const std::filesystem::path& path, const ScalarField& image, int bit_depth = 16);

void save_field(const std::filesystem::path& path, const ScalarField& field);
void save_field(const std::filesystem::path& path, const VectorField& field);

FieldFileHeader read_field_header(const std::filesystem::path& path);
std::variant<ScalarField, VectorField> load_field(const std::filesystem::path& path);
ScalarField load_scalar_field(const std::filesystem::path& path);
VectorField load_vector_field(const std::filesystem::path& path);

/// Loads either an image (.png/.pgm) or a scalar field file (anything else).
ScalarField load_frame(const std::filesystem::path& path);

/// Writes `text` verbatim, replacing `path` atomically.
void save_text(const std::filesystem::path& path, const std::string& text);

using Rgb = std::array<std::uint8_t, 3>;

/// The 256-entry colormap used by save_colormap_png. Entries are linearly
/// interpolated between the control colors
/// (0,0,128) (0,64,255) (0,224,255) (255,255,255) (255,200,0) (255,32,0) (128,0,0):
/// dark blue for the range minimum through white at the midpoint to dark red.
const std::array<Rgb, 256>& colormap();

/// Maps `field` linearly from [range.first, range.second] onto the colormap,
/// clamping out-of-range values, and writes an 8-bit RGB PNG.
void save_colormap_png(const std::filesystem::path& path, const ScalarField& field,
                       std::pair<double, double> range);

}  // namespace eofm
