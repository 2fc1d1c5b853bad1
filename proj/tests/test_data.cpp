#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "colddiff/data/augment.hpp"
#include "colddiff/data/cifar.hpp"
#include "colddiff/data/image_io.hpp"
#include "colddiff/data/mnist.hpp"
#include "colddiff/data/synthetic.hpp"

using namespace colddiff;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_{fs::temp_directory_path() / ("colddiff_data_" + name)} {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& f) const { return path_ / f; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_bytes(const fs::path& p, const std::vector<unsigned char>& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

void be32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}

std::vector<unsigned char> idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols, const std::vector<unsigned char>& px) {
  std::vector<unsigned char> b;
  be32(b, 0x803);
  be32(b, n);
  be32(b, rows);
  be32(b, cols);
  b.insert(b.end(), px.begin(), px.end());
  return b;
}

template <class Fn>
FormatError::Kind error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a FormatError";
  return FormatError::Kind::bad_value;
}

Image random_image(int h, int w, int c, RngStream rng) {
  Image x(h, w, c);
  for (double& v : x.data()) v = rng.uniform();
  return x;
}

}  // namespace

TEST(Mnist, HandBuiltFixture) {
  TempDir dir("idx");
  write_bytes(dir / "img", idx_images(1, 2, 2, {0, 128, 255, 0}));
  std::vector<unsigned char> labels;
  be32(labels, 0x801);
  be32(labels, 1);
  labels.push_back(7);
  write_bytes(dir / "lbl", labels);
  Dataset d = load_mnist_idx((dir / "img").string(), (dir / "lbl").string());
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.shape, (Shape{2, 2, 1}));
  EXPECT_EQ(d[0].values(), (std::vector<double>{0.0, 128.0 / 255.0, 1.0, 0.0}));
  EXPECT_EQ(d.labels, std::vector<int>{7});
}

TEST(Mnist, DistinctFailures) {
  TempDir dir("idx_bad");
  const auto p = (dir / "f").string();
  write_bytes(p, idx_images(2, 2, 2, {1, 2, 3, 4, 5, 6, 7}));
  try {
    load_mnist_idx(p);
    ADD_FAILURE();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::truncated);
    EXPECT_NE(std::string(e.what()).find("truncated payload"), std::string::npos);
  }
  auto bad = idx_images(1, 2, 2, {1, 2, 3, 4});
  bad[3] = 0x01;
  write_bytes(p, bad);
  EXPECT_EQ(error_kind([&] { load_mnist_idx(p); }), FormatError::Kind::bad_magic);
  write_bytes(p, idx_images(1, 2, 2, {1, 2, 3, 4, 5}));
  EXPECT_EQ(error_kind([&] { load_mnist_idx(p); }), FormatError::Kind::dimension_mismatch);
  write_bytes(p, {0, 0, 8});
  EXPECT_EQ(error_kind([&] { load_mnist_idx(p); }), FormatError::Kind::truncated);
  EXPECT_THROW(load_mnist_idx((dir / "missing").string()), MissingInputError);
}

TEST(Mnist, BundledSubset) {
  const std::string dir = std::string(COLDDIFF_SOURCE_DIR) + "/data/mnist";
  Dataset train = load_mnist_dir(dir, Split::train);
  Dataset test = load_mnist_dir(dir, Split::test);
  EXPECT_EQ(train.shape, (Shape{28, 28, 1}));
  EXPECT_EQ(train.size(), 4500u);
  EXPECT_EQ(test.size(), 500u);
  EXPECT_EQ(train.labels.size(), train.size());
  for (const Image& x : test.items)
    for (double v : x.data()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(Cifar, HandBuiltRecord) {
  TempDir dir("cifar");
  std::vector<unsigned char> rec(kCifarRecord);
  rec[0] = 3;
  for (std::size_t i = 1; i < rec.size(); ++i) rec[i] = static_cast<unsigned char>((i * 7) % 256);
  write_bytes(dir / "one.bin", rec);
  Dataset d = load_cifar_bin((dir / "one.bin").string());
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.labels[0], 3);
  for (int c = 0; c < 3; ++c)
    for (int p = 0; p < 1024; ++p)
      ASSERT_EQ(d[0].at(p / 32, p % 32, c), static_cast<double>(rec[1 + static_cast<std::size_t>(c * 1024 + p)]) / 255.0);

  write_bytes(dir / "empty.bin", {});
  Dataset e = load_cifar_bin((dir / "empty.bin").string());
  EXPECT_TRUE(e.empty());

  rec.push_back(0);
  write_bytes(dir / "bad.bin", rec);
  EXPECT_EQ(error_kind([&] { load_cifar_bin((dir / "bad.bin").string()); }), FormatError::Kind::truncated);
}

TEST(ImageIo, GridRoundTripWithinQuantization) {
  TempDir dir("grid");
  std::vector<Image> imgs;
  for (int i = 0; i < 4; ++i) imgs.push_back(random_image(5, 7, 3, RngStream(10 + i)));
  const auto p = (dir / "grid.png").string();
  save_image_grid(imgs, 2, p);
  Image g = load_image(p);
  ASSERT_EQ(g.shape(), (Shape{10, 14, 3}));
  for (int i = 0; i < 4; ++i) {
    const int r0 = (i / 2) * 5, c0 = (i % 2) * 7;
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 7; ++c)
        for (int ch = 0; ch < 3; ++ch) ASSERT_LE(std::abs(g.at(r0 + r, c0 + c, ch) - imgs[static_cast<std::size_t>(i)].at(r, c, ch)), 0.5 / 255.0 + 1e-12);
  }
}

TEST(ImageIo, SingleImageGridIsClampedInput) {
  TempDir dir("single");
  Image x = random_image(6, 6, 1, RngStream(20));
  x.at(0, 0) = 1.4;
  x.at(1, 1) = -0.3;
  Image q = clamp_unit(x);
  for (double& v : q.data()) v = std::round(v * 255.0) / 255.0;
  for (const char* ext : {".png", ".pgm"}) {
    const auto p = (dir / (std::string("one") + ext)).string();
    save_image_grid(std::vector<Image>{x}, 1, p);
    EXPECT_EQ(load_image(p), q) << ext;
  }
}

TEST(ImageIo, SaveLoadSaveIsIdempotent) {
  TempDir dir("idem");
  Image x = random_image(9, 4, 3, RngStream(21));
  save_image(x, (dir / "a.png").string());
  Image a = load_image((dir / "a.png").string());
  save_image(a, (dir / "b.png").string());
  EXPECT_EQ(load_image((dir / "b.png").string()), a);
}

TEST(ImageIo, WriteFailureNamesPath) {
  const std::string p = "/nonexistent_dir_colddiff/out.png";
  try {
    save_image(Image(2, 2, 1), p);
    ADD_FAILURE();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find(p), std::string::npos);
  }
}

TEST(ImageDir, ExactHalvingCropAndOrder) {
  TempDir dir("dir");
  Image big = random_image(256, 256, 3, RngStream(30));
  for (double& v : big.data()) v = std::round(v * 255.0) / 255.0;
  save_image(big, (dir / "b.png").string());
  Image wide(100, 200, 3);
  for (int r = 0; r < 100; ++r)
    for (int c = 0; c < 200; ++c)
      for (int ch = 0; ch < 3; ++ch) wide.at(r, c, ch) = (c >= 50 && c < 150) ? 1.0 : 0.0;
  save_image(wide, (dir / "a.png").string());
  {
    std::ofstream junk(dir / "c.png");
    junk << "not a png";
  }
  std::ofstream(dir / "notes.txt") << "ignored";

  Dataset d = load_image_dir(dir.path().string(), 128);
  ASSERT_EQ(d.size(), 2u);
  // a.png sorts first; its centered 100x100 crop lies entirely inside the white band
  for (double v : d[0].data()) EXPECT_EQ(v, 1.0);
  for (int r = 0; r < 128; ++r)
    for (int c = 0; c < 128; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const double avg = 0.25 * (big.at(2 * r, 2 * c, ch) + big.at(2 * r + 1, 2 * c, ch) + big.at(2 * r, 2 * c + 1, ch) +
                                   big.at(2 * r + 1, 2 * c + 1, ch));
        ASSERT_NEAR(d[1].at(r, c, ch), avg, 1e-12);
      }

  Image raw = load_image((dir / "a.png").string());
  Image crop = center_crop_square(raw);
  EXPECT_EQ(crop.shape(), (Shape{100, 100, 3}));

  TempDir empty("dir_empty");
  std::ofstream(empty / "x.png") << "garbage";
  EXPECT_THROW(load_image_dir(empty.path().string(), 8), MissingInputError);
  EXPECT_THROW(load_image_dir((empty / "nope").string(), 8), MissingInputError);
}

TEST(ImageDir, GrayscaleExpandsToRgb) {
  TempDir dir("gray");
  save_image(random_image(16, 16, 1, RngStream(31)), (dir / "g.pgm").string());
  Dataset d = load_image_dir(dir.path().string(), 16);
  ASSERT_EQ(d[0].channels(), 3);
  for (std::size_t p = 0; p < 256; ++p) EXPECT_EQ(d[0][3 * p], d[0][3 * p + 2]);
}

TEST(Synthetic, FacesAreDeterministicAndVaried) {
  Dataset a = synthetic_faces(6, 32, RngStream(40));
  Dataset b = synthetic_faces(6, 32, RngStream(40));
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(a.shape, (Shape{32, 32, 3}));
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a[i], b[i]);
    for (double v : a[i].data()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  }
  EXPECT_GT(max_abs_diff(a[0], a[1]), 0.1);
  // the face occupies the middle of the frame: centre differs from the corner
  const Image& f = a[0];
  double diff = 0.0;
  for (int ch = 0; ch < 3; ++ch) diff += std::abs(f.at(16, 16, ch) - f.at(0, 0, ch));
  EXPECT_GT(diff, 0.0);
}

TEST(Augment, CropAndFlipToggles) {
  Image x = random_image(8, 8, 3, RngStream(50));
  RngStream rng(51);
  EXPECT_EQ(augment(x, Augment{}, rng), x);
  Image f = flip_horizontal(x);
  EXPECT_EQ(flip_horizontal(f), x);
  EXPECT_EQ(f.at(2, 0, 1), x.at(2, 7, 1));
  EXPECT_EQ(padded_crop(x, 4, 4, 4), x);
  Image shifted = padded_crop(x, 4, 5, 3);
  EXPECT_EQ(shifted.at(0, 1, 0), x.at(1, 0, 0));
  EXPECT_EQ(shifted.at(7, 0, 2), 0.0);
  EXPECT_EQ(shifted.at(0, 0, 2), 0.0);

  Augment flip_only{false, true, 4};
  int flipped = 0;
  for (int i = 0; i < 200; ++i) {
    Image y = augment(x, flip_only, rng);
    ASSERT_TRUE(y == x || y == f);
    flipped += y == f;
  }
  EXPECT_GT(flipped, 70);
  EXPECT_LT(flipped, 130);
  Augment crop_only{true, false, 2};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(augment(x, crop_only, rng).shape(), x.shape());
}
