#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "colddiff/core/errors.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/data/cifar.hpp"
#include "colddiff/data/image_io.hpp"
#include "colddiff/data/mnist.hpp"
#include "colddiff/data/synthetic.hpp"

namespace colddiff {

/// $COLDDIFF_CACHE if set, else ~/.cache/colddiff.
inline std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("COLDDIFF_CACHE"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "colddiff";
  return ".colddiff-cache";
}

/// The MNIST subset shipped with the sources.
inline std::filesystem::path bundled_mnist_dir() { return std::filesystem::path(COLDDIFF_SOURCE_DIR) / "data" / "mnist"; }

struct SourceOptions {
  Split split{Split::train};
  int resolution{32};              // image folders and synthetic faces
  std::optional<std::size_t> limit;
  std::uint64_t seed{0};           // synthetic faces
};

namespace detail {

inline Dataset load_cifar_dir(const std::filesystem::path& dir, Split split) {
  std::vector<std::filesystem::path> files;
  if (split == Split::test) {
    files.push_back(dir / "test_batch.bin");
  } else {
    for (int i = 1; i <= 5; ++i) {
      auto p = dir / ("data_batch_" + std::to_string(i) + ".bin");
      if (std::filesystem::exists(p)) files.push_back(p);
    }
  }
  if (files.empty() || !std::filesystem::exists(files.front())) throw MissingInputError("CIFAR-10 batches not found in " + dir.string());
  Dataset out;
  for (const auto& f : files) {
    Dataset part = load_cifar_bin(f.string(), split);
    if (out.items.empty()) out = std::move(part);
    else {
      out.items.insert(out.items.end(), part.items.begin(), part.items.end());
      out.labels.insert(out.labels.end(), part.labels.begin(), part.labels.end());
    }
  }
  out.name = "cifar10";
  return out;
}

inline bool is_mnist_dir(const std::filesystem::path& p) { return std::filesystem::exists(p / "train-images-idx3-ubyte") || std::filesystem::exists(p / "t10k-images-idx3-ubyte"); }
inline bool is_cifar_dir(const std::filesystem::path& p) { return std::filesystem::exists(p / "data_batch_1.bin") || std::filesystem::exists(p / "test_batch.bin"); }

}  // namespace detail

/// Resolves a dataset source:
///   mnist | cifar10            named datasets under the cache dir (mnist falls back to the bundled subset)
///   faces                      procedurally generated face-like images
///   <dir with IDX files>       MNIST layout
///   <dir with *_batch*.bin>    CIFAR-10 layout
///   <file>.bin                 one CIFAR-10 batch
///   <dir>                      folder of PNG/PGM/PPM images
///   <image file>               a single image
inline Dataset load_source(const std::string& source, const SourceOptions& opt = {}) {
  namespace fs = std::filesystem;
  Dataset d;
  if (source == "mnist") {
    const fs::path cached = cache_dir() / "mnist";
    d = load_mnist_dir((detail::is_mnist_dir(cached) ? cached : bundled_mnist_dir()).string(), opt.split);
  } else if (source == "cifar10") {
    d = detail::load_cifar_dir(cache_dir() / "cifar10", opt.split);
  } else if (source == "faces" || source == "synthetic-faces") {
    const std::size_t n = opt.limit.value_or(256);
    d = synthetic_faces(n, opt.resolution, RngStream(opt.seed, opt.split == Split::train ? 0 : 1), opt.split);
  } else if (fs::is_directory(source)) {
    if (detail::is_mnist_dir(source)) d = load_mnist_dir(source, opt.split);
    else if (detail::is_cifar_dir(source)) d = detail::load_cifar_dir(source, opt.split);
    else d = load_image_dir(source, opt.resolution, opt.split);
  } else if (fs::is_regular_file(source)) {
    if (detail::lower_ext(source) == ".bin") {
      d = load_cifar_bin(source, opt.split);
    } else {
      d.name = fs::path(source).stem().string();
      d.split = opt.split;
      d.push(load_image(source));
    }
  } else {
    throw MissingInputError("dataset source not found: " + source);
  }
  if (opt.limit && d.size() > *opt.limit) d = d.head(*opt.limit);
  return d;
}

}  // namespace colddiff
