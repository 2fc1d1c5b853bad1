#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "colddiff/core/image.hpp"

namespace colddiff::nn {

template <class S>
using MatrixR = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MapR = Eigen::Map<MatrixR<S>>;
template <class S>
using ConstMapR = Eigen::Map<const MatrixR<S>>;

/// Channel-major batch tensor: element (c, n, y, x) lives at ((c * N + n) * H + y) * W + x.
/// With this layout a channel block is a contiguous row of N*H*W values, so a
/// convolution is one GEMM and channel concatenation is an append.
template <class S>
struct Tensor {
  int c{0};
  int n{0};
  int h{0};
  int w{0};
  std::vector<S> data;

  Tensor() = default;
  Tensor(int channels, int batch, int height, int width, S fill = S(0))
      : c{channels}, n{batch}, h{height}, w{width},
        data(static_cast<std::size_t>(channels) * static_cast<std::size_t>(batch) * static_cast<std::size_t>(height) *
                 static_cast<std::size_t>(width),
             fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
  std::size_t image_plane() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
  S* row(int ch) { return data.data() + static_cast<std::size_t>(ch) * plane(); }
  const S* row(int ch) const { return data.data() + static_cast<std::size_t>(ch) * plane(); }
  S& at(int ch, int b, int y, int x) {
    return data[((static_cast<std::size_t>(ch) * n + b) * h + y) * w + x];
  }
  S at(int ch, int b, int y, int x) const {
    return data[((static_cast<std::size_t>(ch) * n + b) * h + y) * w + x];
  }
  MapR<S> matrix() { return MapR<S>(data.data(), c, static_cast<Eigen::Index>(plane())); }
  ConstMapR<S> matrix() const { return ConstMapR<S>(data.data(), c, static_cast<Eigen::Index>(plane())); }
};

/// Stacks images (all the same shape) into a tensor.
template <class S>
Tensor<S> to_tensor(std::span<const Image> images) {
  if (images.empty()) throw std::invalid_argument("to_tensor: empty batch");
  const Shape s = images[0].shape();
  Tensor<S> t(s.channels, static_cast<int>(images.size()), s.height, s.width);
  for (std::size_t b = 0; b < images.size(); ++b) {
    if (images[b].shape() != s) throw std::invalid_argument("to_tensor: mixed shapes in batch");
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        for (int ch = 0; ch < s.channels; ++ch) t.at(ch, static_cast<int>(b), y, x) = static_cast<S>(images[b].at(y, x, ch));
      }
    }
  }
  return t;
}

template <class S>
Image image_from_tensor(const Tensor<S>& t, int b) {
  Image out(t.h, t.w, t.c);
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      for (int ch = 0; ch < t.c; ++ch) out.at(y, x, ch) = static_cast<double>(t.at(ch, b, y, x));
    }
  }
  return out;
}

/// Concatenates along channels.
template <class S>
Tensor<S> concat_channels(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) throw std::invalid_argument("concat_channels: shape mismatch");
  Tensor<S> out;
  out.c = a.c + b.c;
  out.n = a.n;
  out.h = a.h;
  out.w = a.w;
  out.data.reserve(a.data.size() + b.data.size());
  out.data.insert(out.data.end(), a.data.begin(), a.data.end());
  out.data.insert(out.data.end(), b.data.begin(), b.data.end());
  return out;
}

inline int conv_out_size(int in, int stride) { return (in - 1) / stride + 1; }  // k = 3, pad = 1

/// 3x3, zero-padded (pad 1) patch matrix: rows (ci, ky, kx), columns (n, oy, ox).
/// Writes into `col`, reallocating only when the shape changes.
template <class S>
void im2col3(const Tensor<S>& in, int stride, MatrixR<S>& col) {
  const int ho = conv_out_size(in.h, stride);
  const int wo = conv_out_size(in.w, stride);
  const Eigen::Index rows = static_cast<Eigen::Index>(in.c) * 9;
  const Eigen::Index cols = static_cast<Eigen::Index>(in.n) * ho * wo;
  if (col.rows() != rows || col.cols() != cols) col.resize(rows, cols);
  for (int ci = 0; ci < in.c; ++ci) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        S* dst = col.row(static_cast<Eigen::Index>(ci * 9 + ky * 3 + kx)).data();
        // output columns whose source ix = ox * stride + kx - 1 lies inside [0, w)
        const int ox_lo = kx == 0 ? 1 : 0;
        const int ox_hi = std::min(wo, (in.w - kx) / stride + 1);
        for (int b = 0; b < in.n; ++b) {
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride + ky - 1;
            S* out_row = dst + (static_cast<std::size_t>(b) * ho + oy) * wo;
            if (iy < 0 || iy >= in.h) {
              std::fill(out_row, out_row + wo, S(0));
              continue;
            }
            const S* src = in.data.data() + ((static_cast<std::size_t>(ci) * in.n + b) * in.h + iy) * in.w + (kx - 1);
            std::fill(out_row, out_row + ox_lo, S(0));
            if (stride == 1) {
              std::copy(src + ox_lo, src + ox_hi, out_row + ox_lo);
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) out_row[ox] = src[ox * stride];
            }
            std::fill(out_row + std::max(ox_lo, ox_hi), out_row + wo, S(0));
          }
        }
      }
    }
  }
}

template <class S>
MatrixR<S> im2col3(const Tensor<S>& in, int stride) {
  MatrixR<S> col;
  im2col3(in, stride, col);
  return col;
}

/// Adjoint of im2col3: accumulates patch gradients back onto the input grid.
template <class S>
Tensor<S> col2im3(const MatrixR<S>& col, int c, int n, int h, int w, int stride) {
  const int ho = conv_out_size(h, stride);
  const int wo = conv_out_size(w, stride);
  Tensor<S> out(c, n, h, w);
  for (int ci = 0; ci < c; ++ci) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const S* src = col.row(static_cast<Eigen::Index>(ci * 9 + ky * 3 + kx)).data();
        const int ox_lo = kx == 0 ? 1 : 0;
        const int ox_hi = std::min(wo, (w - kx) / stride + 1);
        for (int b = 0; b < n; ++b) {
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride + ky - 1;
            if (iy < 0 || iy >= h) continue;
            const S* in_row = src + (static_cast<std::size_t>(b) * ho + oy) * wo;
            S* dst = out.data.data() + ((static_cast<std::size_t>(ci) * n + b) * h + iy) * w + (kx - 1);
            for (int ox = ox_lo; ox < ox_hi; ++ox) dst[ox * stride] += in_row[ox];
          }
        }
      }
    }
  }
  return out;
}

/// Nearest-neighbor upsample to (h, w): output (y, x) reads input (min(y/2, H-1), min(x/2, W-1)).
template <class S>
Tensor<S> upsample2(const Tensor<S>& in, int h, int w) {
  Tensor<S> out(in.c, in.n, h, w);
  for (int ch = 0; ch < in.c; ++ch) {
    for (int b = 0; b < in.n; ++b) {
      for (int y = 0; y < h; ++y) {
        const int sy = std::min(y / 2, in.h - 1);
        for (int x = 0; x < w; ++x) out.at(ch, b, y, x) = in.at(ch, b, sy, std::min(x / 2, in.w - 1));
      }
    }
  }
  return out;
}

template <class S>
Tensor<S> upsample2_backward(const Tensor<S>& grad, int h, int w) {
  Tensor<S> out(grad.c, grad.n, h, w);
  for (int ch = 0; ch < grad.c; ++ch) {
    for (int b = 0; b < grad.n; ++b) {
      for (int y = 0; y < grad.h; ++y) {
        const int sy = std::min(y / 2, h - 1);
        for (int x = 0; x < grad.w; ++x) out.at(ch, b, sy, std::min(x / 2, w - 1)) += grad.at(ch, b, y, x);
      }
    }
  }
  return out;
}

template <class S>
S sigmoid(S z) {
  return S(1) / (S(1) + std::exp(-z));
}

/// SiLU z * sigmoid(z).
template <class S>
void silu_inplace(std::vector<S>& v) {
  for (S& z : v) z = z * sigmoid(z);
}

template <class S>
S silu_grad(S z) {
  const S s = sigmoid(z);
  return s * (S(1) + z * (S(1) - s));
}

/// Sinusoidal embedding of integer steps: rows 0..E/2-1 are sin(t f_k), the rest cos(t f_k),
/// f_k = 10000^(-k / (E/2)). Returns an E x N matrix.
template <class S>
MatrixR<S> time_embedding(std::span<const int> steps, int dim) {
  MatrixR<S> e(dim, static_cast<Eigen::Index>(steps.size()));
  const int half = dim / 2;
  for (std::size_t j = 0; j < steps.size(); ++j) {
    for (int k = 0; k < half; ++k) {
      const double f = std::exp(-std::log(10000.0) * static_cast<double>(k) / std::max(1, half));
      const double a = static_cast<double>(steps[j]) * f;
      e(k, static_cast<Eigen::Index>(j)) = static_cast<S>(std::sin(a));
      e(k + half, static_cast<Eigen::Index>(j)) = static_cast<S>(std::cos(a));
    }
    if (dim % 2 == 1) e(dim - 1, static_cast<Eigen::Index>(j)) = S(0);
  }
  return e;
}

}  // namespace colddiff::nn
