#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace colddiff {

/// Height, width and channel count of an image.
struct Shape {
  int height{0};
  int width{0};
  int channels{0};

  std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool operator==(const Shape&) const = default;

  std::string str() const {
    return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
  }
};

/// An H x W x C image of reals stored row-major with interleaved channels.
/// Values nominally live in [0, 1] but arithmetic is unclamped.
class Image {
 public:
  Image() = default;

  Image(int height, int width, int channels, double fill = 0.0)
      : shape_{height, width, channels} {
    validate_shape(shape_);
    data_.assign(shape_.size(), fill);
  }

  explicit Image(Shape shape, double fill = 0.0) : Image(shape.height, shape.width, shape.channels, fill) {}

  Image(Shape shape, std::vector<double> data) : shape_{shape}, data_{std::move(data)} {
    validate_shape(shape_);
    if (data_.size() != shape_.size()) {
      throw std::invalid_argument("Image: data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_.str());
    }
  }

  /// Constant image whose channel c equals color[c].
  static Image solid(int height, int width, std::span<const double> color) {
    Image out(height, width, static_cast<int>(color.size()));
    for (std::size_t p = 0; p < out.shape_.pixels(); ++p) {
      std::copy(color.begin(), color.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(p * color.size()));
    }
    return out;
  }

  const Shape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(shape_.width) +
            static_cast<std::size_t>(col)) * static_cast<std::size_t>(shape_.channels) +
           static_cast<std::size_t>(ch);
  }
  double& at(int row, int col, int ch = 0) { return data_[index(row, col, ch)]; }
  double at(int row, int col, int ch = 0) const { return data_[index(row, col, ch)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  Image& operator+=(const Image& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  Image& operator-=(const Image& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  Image& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  Image& operator+=(double s) {
    for (double& v : data_) v += s;
    return *this;
  }

  friend Image operator+(Image a, const Image& b) { return a += b; }
  friend Image operator-(Image a, const Image& b) { return a -= b; }
  friend Image operator*(Image a, double s) { return a *= s; }
  friend Image operator*(double s, Image a) { return a *= s; }

  /// Bitwise equality of shape and every element.
  bool operator==(const Image& other) const = default;

  static void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (a.shape_ != b.shape_) {
      throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_.str() + " vs " +
                                  b.shape_.str());
    }
  }

 private:
  static void validate_shape(const Shape& s) {
    if (s.height <= 0 || s.width <= 0) throw std::invalid_argument("Image: height and width must be positive");
    if (s.channels != 1 && s.channels != 3) throw std::invalid_argument("Image: channels must be 1 or 3");
  }

  Shape shape_{};
  std::vector<double> data_;
};

/// Per-channel arithmetic mean.
inline std::vector<double> channel_means(const Image& x) {
  const int c = x.channels();
  std::vector<double> sums(static_cast<std::size_t>(c), 0.0);
  const auto data = x.data();
  for (std::size_t i = 0; i < data.size(); ++i) sums[i % static_cast<std::size_t>(c)] += data[i];
  const double n = static_cast<double>(x.shape().pixels());
  for (double& s : sums) s /= n;
  return sums;
}

/// Elementwise min(max(v, 0), 1).
inline Image clamp_unit(Image x) {
  for (double& v : x.data()) v = std::clamp(v, 0.0, 1.0);
  return x;
}

/// a*x + b*y
inline Image lincomb(double a, const Image& x, double b, const Image& y) {
  Image::require_same_shape(x, y, "lincomb");
  Image out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  Image::require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const Image& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const Image& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline bool all_finite(const Image& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

/// Single channel c of x as a one-channel image.
inline Image extract_channel(const Image& x, int c) {
  Image out(x.height(), x.width(), 1);
  for (std::size_t p = 0; p < x.shape().pixels(); ++p) {
    out[p] = x[p * static_cast<std::size_t>(x.channels()) + static_cast<std::size_t>(c)];
  }
  return out;
}

/// 64-bit FNV-1a over the shape and raw element bits.
inline std::uint64_t fingerprint(const Image& x) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const Shape s = x.shape();
  mix(&s, sizeof s);
  mix(x.data().data(), x.size() * sizeof(double));
  return h;
}

}  // namespace colddiff
