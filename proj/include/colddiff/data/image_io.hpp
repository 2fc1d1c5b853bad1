#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/errors.hpp"
#include "colddiff/core/image.hpp"
#include "colddiff/core/log.hpp"
#include "colddiff/data/dataset.hpp"

namespace colddiff {

/// Unit-interval value to byte: clamp, then round to nearest.
inline unsigned char quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::string lower_ext(const std::string& path) {
  std::string e = std::filesystem::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

[[noreturn]] inline void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

inline void png_warn(png_structp, png_const_charp) {}

inline void write_png(const Image& x, const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write '" + path + "'");
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed for '" + path + "'");
  }
  const int w = x.width(), h = x.height(), c = x.channels();
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * c);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG write failed for '" + path + "': " + err);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto d = x.data();
  for (int r = 0; r < h; ++r) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = quantize(d[static_cast<std::size_t>(r) * row.size() + k]);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Decodes any PNG to 8-bit gray or RGB (alpha dropped, palettes expanded).
inline Image read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw MissingInputError("cannot open '" + path + "'");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(FormatError::Kind::bad_magic, "'" + path + "' is not a PNG file");
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng initialisation failed for '" + path + "'");
  }
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(FormatError::Kind::bad_value, "PNG decode failed for '" + path + "': " + err);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  int channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * static_cast<std::size_t>(h));
  rows.resize(static_cast<std::size_t>(h));
  for (int r = 0; r < h; ++r) rows[static_cast<std::size_t>(r)] = pixels.data() + stride * static_cast<std::size_t>(r);
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  const int out_c = channels >= 3 ? 3 : 1;
  const int step = static_cast<int>(stride / static_cast<std::size_t>(w));
  Image x(h, w, out_c);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < out_c; ++ch) {
        x.at(r, c, ch) = rows[static_cast<std::size_t>(r)][c * step + ch] / 255.0;
      }
    }
  }
  return x;
}

inline void write_pnm(const Image& x, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os << (x.channels() == 1 ? "P5" : "P6") << '\n' << x.width() << ' ' << x.height() << "\n255\n";
  std::vector<unsigned char> buf(x.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = quantize(x[i]);
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline Image read_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("cannot open '" + path + "'");
  auto token = [&]() {
    std::string t;
    char ch;
    while (is.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(is, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(ch);
    }
    return t;
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P6") throw FormatError(FormatError::Kind::bad_magic, "'" + path + "' is not a binary PGM/PPM");
  int w = 0, h = 0, maxv = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxv = std::stoi(token());
  } catch (const std::logic_error&) {
    throw FormatError(FormatError::Kind::bad_value, "'" + path + "': malformed PNM header");
  }
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 255) {
    throw FormatError(FormatError::Kind::bad_value, "'" + path + "': unsupported PNM dimensions or depth");
  }
  const int c = magic == "P5" ? 1 : 3;
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * c);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size()) {
    throw FormatError(FormatError::Kind::truncated, "'" + path + "': truncated payload");
  }
  Image x(h, w, c);
  for (std::size_t i = 0; i < buf.size(); ++i) x[i] = buf[i] / static_cast<double>(maxv);
  return x;
}

}  // namespace detail

inline bool is_image_file(const std::string& path) {
  const std::string e = detail::lower_ext(path);
  return e == ".png" || e == ".pgm" || e == ".ppm" || e == ".pnm";
}

/// Writes PNG, or binary PGM/PPM for .pgm/.ppm/.pnm. Values are clamped and quantized to 8 bits.
inline void save_image(const Image& x, const std::string& path) {
  const std::string e = detail::lower_ext(path);
  if (e == ".pgm" || e == ".ppm" || e == ".pnm") {
    detail::write_pnm(x, path);
  } else {
    detail::write_png(x, path);
  }
}

inline Image load_image(const std::string& path) {
  if (!std::filesystem::exists(path)) throw MissingInputError("image not found: " + path);
  const std::string e = detail::lower_ext(path);
  if (e == ".pgm" || e == ".ppm" || e == ".pnm") return detail::read_pnm(path);
  return detail::read_png(path);
}

/// Row-major tiling of same-shape images into one picture.
inline Image tile_images(std::span<const Image> images, int columns) {
  if (images.empty()) throw std::invalid_argument("tile_images: no images");
  if (columns < 1) throw std::invalid_argument("tile_images: columns must be >= 1");
  const Shape s = images[0].shape();
  const int cols = std::min<int>(columns, static_cast<int>(images.size()));
  const int rows = static_cast<int>((images.size() + static_cast<std::size_t>(cols) - 1) / static_cast<std::size_t>(cols));
  Image grid(rows * s.height, cols * s.width, s.channels);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].shape() != s) throw std::invalid_argument("tile_images: images differ in shape");
    const int gr = static_cast<int>(i) / cols, gc = static_cast<int>(i) % cols;
    for (int r = 0; r < s.height; ++r) {
      for (int c = 0; c < s.width; ++c) {
        for (int ch = 0; ch < s.channels; ++ch) grid.at(gr * s.height + r, gc * s.width + c, ch) = images[i].at(r, c, ch);
      }
    }
  }
  return grid;
}

inline void save_image_grid(std::span<const Image> images, int columns, const std::string& path) {
  save_image(tile_images(images, columns), path);
}

/// Largest centered square.
inline Image center_crop_square(const Image& x) {
  const int side = std::min(x.height(), x.width());
  const int r0 = (x.height() - side) / 2, c0 = (x.width() - side) / 2;
  Image out(side, side, x.channels());
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      for (int ch = 0; ch < x.channels(); ++ch) out.at(r, c, ch) = x.at(r0 + r, c0 + c, ch);
    }
  }
  return out;
}

/// Bilinear resampling with pixel-center alignment.
inline Image resize_bilinear(const Image& x, int height, int width) {
  if (height == x.height() && width == x.width()) return x;
  Image out(height, width, x.channels());
  const double sy = static_cast<double>(x.height()) / height, sx = static_cast<double>(x.width()) / width;
  for (int r = 0; r < height; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(x.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, x.height() - 1);
    const double wy = fy - y0;
    for (int c = 0; c < width; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(x.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, x.width() - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < x.channels(); ++ch) {
        const double top = (1 - wx) * x.at(y0, x0, ch) + wx * x.at(y0, x1, ch);
        const double bot = (1 - wx) * x.at(y1, x0, ch) + wx * x.at(y1, x1, ch);
        out.at(r, c, ch) = (1 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

inline Image to_rgb(const Image& x) {
  if (x.channels() == 3) return x;
  Image out(x.height(), x.width(), 3);
  for (std::size_t p = 0; p < x.shape().pixels(); ++p) {
    for (int ch = 0; ch < 3; ++ch) out[p * 3 + static_cast<std::size_t>(ch)] = x[p];
  }
  return out;
}

/// Every decodable image in `dir`, in lexicographic filename order, center-cropped to a
/// square and resized to resolution x resolution RGB. Undecodable files are skipped with a warning.
inline Dataset load_image_dir(const std::string& dir, int resolution, Split split = Split::train) {
  if (!std::filesystem::is_directory(dir)) throw MissingInputError("image directory not found: " + dir);
  if (resolution < 1) throw std::invalid_argument("load_image_dir: resolution must be >= 1");
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  Dataset d;
  d.name = std::filesystem::path(dir).filename().string();
  d.split = split;
  d.shape = Shape{resolution, resolution, 3};
  for (const auto& f : files) {
    if (!is_image_file(f)) {
      log::warn("skipping '" + f + "': unsupported extension");
      continue;
    }
    try {
      Image x = load_image(f);
      d.items.push_back(resize_bilinear(center_crop_square(to_rgb(x)), resolution, resolution));
    } catch (const std::exception& e) {
      log::warn("skipping '" + f + "': " + e.what());
    }
  }
  if (d.items.empty()) throw MissingInputError("no decodable images in " + dir);
  return d;
}

/// Images to a dataset directory as zero-padded PNGs.
inline void save_image_dir(std::span<const Image> images, const std::string& dir, const std::string& stem = "img") {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%05zu.png", stem.c_str(), i);
    save_image(images[i], (std::filesystem::path(dir) / name).string());
  }
}

}  // namespace colddiff
