#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "colddiff/core/image.hpp"

namespace colddiff {

/// Square kernel stored row-major.
struct Kernel2D {
  int size{0};
  std::vector<double> weights;

  double at(int row, int col) const { return weights[static_cast<std::size_t>(row * size + col)]; }
  double sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Sampled 1-D Gaussian on the centered integer grid, normalized to sum 1.
inline std::vector<double> gaussian_kernel_1d(int size, double sigma) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian kernel size must be odd and positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian kernel sigma must be positive");
  const int r = size / 2;
  std::vector<double> k(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int u = -r; u <= r; ++u) {
    const double v = std::exp(-static_cast<double>(u * u) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(u + r)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Sampled 2-D Gaussian exp(-(u^2+v^2) / (2 sigma^2)), normalized to sum 1.
inline Kernel2D gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("gaussian kernel size must be odd and positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian kernel sigma must be positive");
  const int r = size / 2;
  Kernel2D k{size, std::vector<double>(static_cast<std::size_t>(size * size))};
  double sum = 0.0;
  for (int u = -r; u <= r; ++u) {
    for (int v = -r; v <= r; ++v) {
      const double w = std::exp(-static_cast<double>(u * u + v * v) / (2.0 * sigma * sigma));
      k.weights[static_cast<std::size_t>((u + r) * size + (v + r))] = w;
      sum += w;
    }
  }
  for (double& w : k.weights) w /= sum;
  return k;
}

/// Half-sample symmetric extension (... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ...),
/// valid for any offset. With a symmetric kernel this extension keeps the image
/// mean exactly.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

/// Full linear convolution of two 1-D kernels.
inline std::vector<double> convolve_kernels(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

enum class Axis { rows, cols };

/// Correlates every channel with a centered odd-length 1-D kernel along one axis.
inline Image convolve_axis(const Image& x, std::span<const double> kernel, Axis axis) {
  if (kernel.size() % 2 == 0) throw std::invalid_argument("convolve_axis: kernel length must be odd");
  const int r = static_cast<int>(kernel.size() / 2);
  const int h = x.height();
  const int w = x.width();
  const int c = x.channels();
  Image out(x.shape());
  if (axis == Axis::cols) {
    std::vector<int> idx(static_cast<std::size_t>(w + 2 * r));
    for (int j = -r; j < w + r; ++j) idx[static_cast<std::size_t>(j + r)] = reflect_index(j, w);
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        for (int ch = 0; ch < c; ++ch) {
          double s = 0.0;
          for (int k = -r; k <= r; ++k) {
            s += kernel[static_cast<std::size_t>(k + r)] * x.at(row, idx[static_cast<std::size_t>(col + k + r)], ch);
          }
          out.at(row, col, ch) = s;
        }
      }
    }
  } else {
    std::vector<int> idx(static_cast<std::size_t>(h + 2 * r));
    for (int i = -r; i < h + r; ++i) idx[static_cast<std::size_t>(i + r)] = reflect_index(i, h);
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        for (int ch = 0; ch < c; ++ch) {
          double s = 0.0;
          for (int k = -r; k <= r; ++k) {
            s += kernel[static_cast<std::size_t>(k + r)] * x.at(idx[static_cast<std::size_t>(row + k + r)], col, ch);
          }
          out.at(row, col, ch) = s;
        }
      }
    }
  }
  return out;
}

/// Separable 2-D convolution with the outer product kernel k (x) k.
inline Image convolve_separable(const Image& x, std::span<const double> kernel) {
  return convolve_axis(convolve_axis(x, kernel, Axis::cols), kernel, Axis::rows);
}

/// Direct (non-separable) 2-D convolution with reflective boundaries.
inline Image convolve_2d(const Image& x, const Kernel2D& k) {
  const int r = k.size / 2;
  Image out(x.shape());
  for (int row = 0; row < x.height(); ++row) {
    for (int col = 0; col < x.width(); ++col) {
      for (int ch = 0; ch < x.channels(); ++ch) {
        double s = 0.0;
        for (int u = -r; u <= r; ++u) {
          const int rr = reflect_index(row + u, x.height());
          for (int v = -r; v <= r; ++v) {
            s += k.at(u + r, v + r) * x.at(rr, reflect_index(col + v, x.width()), ch);
          }
        }
        out.at(row, col, ch) = s;
      }
    }
  }
  return out;
}

}  // namespace colddiff
