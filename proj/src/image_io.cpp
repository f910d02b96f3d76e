#include "eofm/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "eofm/error.hpp"

namespace eofm {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Writes through a temporary sibling and renames it into place so a failed
// write never leaves a partial file at `path`.
template <typename Writer>
void write_atomically(const fs::path& path, Writer&& writer) {
  if (path.empty()) throw IoError("empty output path");
  fs::path tmp = path;
  tmp += ".partial";
  try {
    writer(tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  return f;
}

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

ScalarField load_png(const fs::path& path) {
  auto file = open_file(path, "rb");
  unsigned char signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw IoError(path.string() + ": not a PNG file");
  }
  std::string message;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw IoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }

  std::vector<std::uint8_t> raw;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  volatile bool unsupported = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": PNG decode error: " + message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type != PNG_COLOR_TYPE_GRAY || (bit_depth != 8 && bit_depth != 16)) {
    unsupported = true;
  } else if (width > 0 && height > 0) {
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    raw.resize(row_bytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (unsupported) {
    throw IoError(path.string() + ": only 8/16-bit grayscale PNG is supported");
  }
  if (width == 0 || height == 0) throw IoError(path.string() + ": zero-dimension image");
  GridGeometry geom(static_cast<int>(width), static_cast<int>(height));
  ScalarField out(geom);
  if (bit_depth == 8) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw[i] / 255.0;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      out[i] = v / 65535.0;
    }
  }
  return out;
}

void write_png(const fs::path& path, int width, int height, int bit_depth, int color_type,
               const std::vector<std::uint8_t>& raw) {
  auto file = open_file(path, "wb");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                            png_warning_handler);
  if (!png) throw IoError("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": PNG encode error: " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row_bytes = raw.size() / static_cast<std::size_t>(height);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(raw.data() + y * row_bytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError(path.string() + ": write failed");
}

// Skips whitespace and '#' comments in a PGM header.
int read_pgm_int(std::istream& in, const fs::path& path) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  long value = -1;
  if (!(in >> value) || value < 0) throw IoError(path.string() + ": malformed PGM header");
  return static_cast<int>(value);
}

ScalarField load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw IoError(path.string() + ": only binary PGM (P5) is supported");
  }
  const int width = read_pgm_int(in, path);
  const int height = read_pgm_int(in, path);
  const int maxval = read_pgm_int(in, path);
  in.get();  // single whitespace before raster
  if (width == 0 || height == 0) throw IoError(path.string() + ": zero-dimension image");
  if (maxval <= 0 || maxval > 65535) throw IoError(path.string() + ": bad PGM maxval");
  GridGeometry geom(width, height);
  ScalarField out(geom);
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<std::uint8_t> raw(out.size() * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError(path.string() + ": truncated PGM raster");
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned v = bytes_per == 1 ? raw[i] : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
    out[i] = static_cast<double>(v) / maxval;
  }
  return out;
}

std::vector<std::uint8_t> quantize(const ScalarField& image, int bit_depth) {
  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  std::vector<std::uint8_t> raw(image.size() * (bit_depth / 8));
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto v = static_cast<unsigned>(std::lround(std::clamp(image[i], 0.0, 1.0) * maxval));
    if (bit_depth == 8) {
      raw[i] = static_cast<std::uint8_t>(v);
    } else {
      raw[2 * i] = static_cast<std::uint8_t>(v >> 8);
      raw[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
    }
  }
  return raw;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_field_file(const fs::path& path, const GridGeometry& geom,
                      const std::vector<const std::vector<double>*>& planes) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(FieldFileHeader::kBytes + planes.size() * geom.size() * 4);
  bytes.insert(bytes.end(), std::begin(FieldFileHeader::kMagic), std::end(FieldFileHeader::kMagic));
  put_u32(bytes, static_cast<std::uint32_t>(geom.width));
  put_u32(bytes, static_cast<std::uint32_t>(geom.height));
  put_u32(bytes, static_cast<std::uint32_t>(planes.size()));
  for (const auto* plane : planes) {
    for (double v : *plane) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  write_atomically(path, [&](const fs::path& tmp) {
    auto file = open_file(tmp, "wb");
    if (std::fwrite(bytes.data(), 1, bytes.size(), file.get()) != bytes.size() ||
        std::fflush(file.get()) != 0) {
      throw IoError(path.string() + ": write failed");
    }
  });
}

FieldFileHeader parse_header(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  if (bytes.size() < FieldFileHeader::kBytes ||
      std::memcmp(bytes.data(), FieldFileHeader::kMagic, 8) != 0) {
    throw IoError(path.string() + ": bad field file magic");
  }
  FieldFileHeader h;
  h.width = get_u32(bytes.data() + 8);
  h.height = get_u32(bytes.data() + 12);
  h.components = get_u32(bytes.data() + 16);
  if (h.components != 1 && h.components != 2) {
    throw IoError(path.string() + ": field file must have 1 or 2 components");
  }
  const std::size_t expected =
      FieldFileHeader::kBytes + std::size_t{h.width} * h.height * h.components * 4;
  if (bytes.size() != expected) throw IoError(path.string() + ": field file size mismatch");
  return h;
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> read_plane(const std::vector<std::uint8_t>& bytes, std::size_t plane,
                               std::size_t count) {
  std::vector<double> out(count);
  const std::uint8_t* base = bytes.data() + FieldFileHeader::kBytes + plane * count * 4;
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<double>(std::bit_cast<float>(get_u32(base + 4 * i)));
  }
  return out;
}

}  // namespace

ScalarField load_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  const auto ext = lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm") return load_pgm(path);
  throw IoError(path.string() + ": unsupported image format (expected .png or .pgm)");
}

void save_image(const fs::path& path, const ScalarField& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("bit depth must be 8 or 16");
  const auto ext = lower_extension(path);
  const auto raw = quantize(image, bit_depth);
  if (ext == ".png") {
    write_atomically(path, [&](const fs::path& tmp) {
      write_png(tmp, image.width(), image.height(), bit_depth, PNG_COLOR_TYPE_GRAY, raw);
    });
  } else if (ext == ".pgm") {
    write_atomically(path, [&](const fs::path& tmp) {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw IoError("cannot open " + tmp.string());
      out << "P5\n" << image.width() << ' ' << image.height() << '\n'
          << (bit_depth == 8 ? 255 : 65535) << '\n';
      out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
      if (!out.flush()) throw IoError(path.string() + ": write failed");
    });
  } else {
    throw IoError(path.string() + ": unsupported image format (expected .png or .pgm)");
  }
}

void save_field(const fs::path& path, const ScalarField& field) {
  write_field_file(path, field.geometry(), {&field.values()});
}

void save_field(const fs::path& path, const VectorField& field) {
  write_field_file(path, field.geometry(), {&field.u1(), &field.u2()});
}

FieldFileHeader read_field_header(const fs::path& path) { return parse_header(read_all(path), path); }

std::variant<ScalarField, VectorField> load_field(const fs::path& path) {
  const auto bytes = read_all(path);
  const auto h = parse_header(bytes, path);
  GridGeometry geom(static_cast<int>(h.width), static_cast<int>(h.height));
  if (h.components == 1) return ScalarField(geom, read_plane(bytes, 0, geom.size()));
  return VectorField(geom, read_plane(bytes, 0, geom.size()), read_plane(bytes, 1, geom.size()));
}

ScalarField load_scalar_field(const fs::path& path) {
  auto f = load_field(path);
  if (auto* s = std::get_if<ScalarField>(&f)) return std::move(*s);
  throw IoError(path.string() + ": expected a scalar field, found a vector field");
}

VectorField load_vector_field(const fs::path& path) {
  auto f = load_field(path);
  if (auto* v = std::get_if<VectorField>(&f)) return std::move(*v);
  throw IoError(path.string() + ": expected a vector field, found a scalar field");
}

ScalarField load_frame(const fs::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".png" || ext == ".pgm") return load_image(path);
  return load_scalar_field(path);
}

void save_text(const fs::path& path, const std::string& text) {
  write_atomically(path, [&](const fs::path& tmp) {
    auto f = open_file(tmp, "wb");
    if (!text.empty() && std::fwrite(text.data(), 1, text.size(), f.get()) != text.size()) {
      throw IoError(tmp.string() + ": write failed");
    }
    if (std::fclose(f.release()) != 0) throw IoError(tmp.string() + ": write failed");
  });
}

const std::array<Rgb, 256>& colormap() {
  static const std::array<Rgb, 256> table = [] {
    constexpr std::array<std::array<double, 3>, 7> stops = {{{0, 0, 128},
                                                             {0, 64, 255},
                                                             {0, 224, 255},
                                                             {255, 255, 255},
                                                             {255, 200, 0},
                                                             {255, 32, 0},
                                                             {128, 0, 0}}};
    std::array<Rgb, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double pos = i / 255.0 * (stops.size() - 1);
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
      const double f = pos - static_cast<double>(k);
      for (int c = 0; c < 3; ++c) {
        const double v = stops[k][c] * (1.0 - f) + stops[k + 1][c] * f;
        t[i][c] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
    return t;
  }();
  return table;
}

void save_colormap_png(const fs::path& path, const ScalarField& field,
                       std::pair<double, double> range) {
  const auto [lo, hi] = range;
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("colormap range must satisfy min < max");
  }
  const auto& cmap = colormap();
  std::vector<std::uint8_t> raw(field.size() * 3);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double t = std::clamp((field[i] - lo) / (hi - lo), 0.0, 1.0);
    const auto& rgb = cmap[static_cast<std::size_t>(std::lround(t * 255.0))];
    std::copy(rgb.begin(), rgb.end(), raw.begin() + 3 * static_cast<std::ptrdiff_t>(i));
  }
  write_atomically(path, [&](const fs::path& tmp) {
    write_png(tmp, field.width(), field.height(), 8, PNG_COLOR_TYPE_RGB, raw);
  });
}

}  // namespace eofm
