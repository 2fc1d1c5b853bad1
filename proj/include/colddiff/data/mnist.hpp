#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "colddiff/core/binary.hpp"
#include "colddiff/core/errors.hpp"
#include "colddiff/data/dataset.hpp"

namespace colddiff {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail {

inline std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

inline void idx_need(const std::vector<unsigned char>& b, std::size_t n, const std::string& path, const char* part) {
  if (b.size() < n) {
    throw FormatError(FormatError::Kind::truncated, "IDX '" + path + "': truncated " + part + " (" +
                                                        std::to_string(b.size()) + " of " + std::to_string(n) + " bytes)");
  }
}

}  // namespace detail

/// Parses an IDX3 image file (big-endian magic 0x803, count, rows, cols, then bytes).
/// Pixels map to v / 255. With a label file the counts must agree.
inline Dataset load_mnist_idx(const std::string& images_path, const std::optional<std::string>& labels_path = std::nullopt,
                              Split split = Split::train) {
  const auto img = bin::read_file(images_path);
  detail::idx_need(img, 16, images_path, "header");
  if (detail::be32(img, 0) != kIdxImageMagic) {
    throw FormatError(FormatError::Kind::bad_magic, "IDX '" + images_path + "': bad magic, expected 0x00000803");
  }
  const std::uint32_t n = detail::be32(img, 4);
  const std::uint32_t rows = detail::be32(img, 8);
  const std::uint32_t cols = detail::be32(img, 12);
  if (rows == 0 || cols == 0 || rows > 65536 || cols > 65536) {
    throw FormatError(FormatError::Kind::dimension_mismatch, "IDX '" + images_path + "': invalid dimensions " +
                                                                 std::to_string(rows) + "x" + std::to_string(cols));
  }
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  const std::size_t need = 16 + plane * n;
  if (img.size() < need) {
    throw FormatError(FormatError::Kind::truncated, "IDX '" + images_path + "': truncated payload (" +
                                                        std::to_string(img.size()) + " of " + std::to_string(need) + " bytes)");
  }
  if (img.size() > need) {
    throw FormatError(FormatError::Kind::dimension_mismatch, "IDX '" + images_path + "': " +
                                                                 std::to_string(img.size() - need) +
                                                                 " bytes beyond the declared dimensions");
  }

  std::vector<int> labels;
  if (labels_path) {
    const auto lab = bin::read_file(*labels_path);
    detail::idx_need(lab, 8, *labels_path, "header");
    if (detail::be32(lab, 0) != kIdxLabelMagic) {
      throw FormatError(FormatError::Kind::bad_magic, "IDX '" + *labels_path + "': bad magic, expected 0x00000801");
    }
    const std::uint32_t ln = detail::be32(lab, 4);
    if (ln != n) {
      throw FormatError(FormatError::Kind::dimension_mismatch, "IDX: " + std::to_string(n) + " images but " +
                                                                   std::to_string(ln) + " labels");
    }
    if (lab.size() < 8 + static_cast<std::size_t>(n)) {
      throw FormatError(FormatError::Kind::truncated, "IDX '" + *labels_path + "': truncated payload");
    }
    labels.assign(lab.begin() + 8, lab.begin() + 8 + n);
  }

  Dataset d;
  d.name = std::filesystem::path(images_path).filename().string();
  d.split = split;
  d.shape = Shape{static_cast<int>(rows), static_cast<int>(cols), 1};
  d.items.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::vector<double> px(plane);
    const unsigned char* src = img.data() + 16 + plane * i;
    for (std::size_t k = 0; k < plane; ++k) px[k] = static_cast<double>(src[k]) / 255.0;
    d.items.emplace_back(d.shape, std::move(px));
  }
  d.labels = std::move(labels);
  return d;
}

/// Loads `<dir>/{train,t10k}-images-idx3-ubyte` and the matching label file.
inline Dataset load_mnist_dir(const std::string& dir, Split split) {
  const std::string prefix = split == Split::train ? "train" : "t10k";
  const auto base = std::filesystem::path(dir);
  const auto images = base / (prefix + "-images-idx3-ubyte");
  const auto labels = base / (prefix + "-labels-idx1-ubyte");
  if (!std::filesystem::exists(images)) throw MissingInputError("MNIST images not found: " + images.string());
  std::optional<std::string> lp;
  if (std::filesystem::exists(labels)) lp = labels.string();
  Dataset d = load_mnist_idx(images.string(), lp, split);
  d.name = "mnist";
  return d;
}

}  // namespace colddiff
