#pragma once

#include <stdexcept>
#include <string>

#include "colddiff/core/image.hpp"

namespace colddiff {

/// 2x2 average pooling.
inline Image average_pool2(const Image& x) {
  if (x.height() % 2 != 0 || x.width() % 2 != 0) {
    throw std::invalid_argument("average_pool2: size " + x.shape().str() + " is not divisible by 2");
  }
  Image out(x.height() / 2, x.width() / 2, x.channels());
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      for (int ch = 0; ch < x.channels(); ++ch) {
        out.at(r, c, ch) = 0.25 * (x.at(2 * r, 2 * c, ch) + x.at(2 * r, 2 * c + 1, ch) + x.at(2 * r + 1, 2 * c, ch) +
                                   x.at(2 * r + 1, 2 * c + 1, ch));
      }
    }
  }
  return out;
}

/// Nearest-neighbor resize to height x width.
inline Image upsample_nearest(const Image& x, int height, int width) {
  Image out(height, width, x.channels());
  for (int r = 0; r < height; ++r) {
    const int sr = r * x.height() / height;
    for (int c = 0; c < width; ++c) {
      const int sc = c * x.width() / width;
      for (int ch = 0; ch < x.channels(); ++ch) out.at(r, c, ch) = x.at(sr, sc, ch);
    }
  }
  return out;
}

/// Zero-pads x to size x size, centered.
inline Image pad_centered(const Image& x, int size) {
  if (x.height() > size || x.width() > size) throw std::invalid_argument("pad_centered: image larger than target");
  Image out(size, size, x.channels());
  const int r0 = (size - x.height()) / 2;
  const int c0 = (size - x.width()) / 2;
  for (int r = 0; r < x.height(); ++r) {
    for (int c = 0; c < x.width(); ++c) {
      for (int ch = 0; ch < x.channels(); ++ch) out.at(r + r0, c + c0, ch) = x.at(r, c, ch);
    }
  }
  return out;
}

/// Inverse of pad_centered.
inline Image crop_centered(const Image& x, int height, int width) {
  Image out(height, width, x.channels());
  const int r0 = (x.height() - height) / 2;
  const int c0 = (x.width() - width) / 2;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < x.channels(); ++ch) out.at(r, c, ch) = x.at(r + r0, c + c0, ch);
    }
  }
  return out;
}

/// t successive 2x2 average-pool halvings followed by a nearest-neighbor
/// upsample back to the input size. No halving may go below final_res.
inline Image downsample_degrade(const Image& x, int t, int final_res) {
  if (t < 0) throw std::out_of_range("downsample_degrade: negative step");
  if (final_res < 1) throw std::invalid_argument("downsample_degrade: final resolution must be positive");
  if (t == 0) return x;
  const int factor = 1 << t;
  for (int side : {x.height(), x.width()}) {
    if (side % factor != 0) {
      throw std::invalid_argument("downsample_degrade: side " + std::to_string(side) + " not divisible by 2^" +
                                  std::to_string(t));
    }
    if (factor * final_res > side) {
      throw std::invalid_argument("downsample_degrade: 2^" + std::to_string(t) + " * " + std::to_string(final_res) +
                                  " exceeds side " + std::to_string(side));
    }
  }
  Image low = x;
  for (int s = 0; s < t; ++s) low = average_pool2(low);
  return upsample_nearest(low, x.height(), x.width());
}

/// Downsampling family with an optional zero-pad so non power-of-two inputs
/// (28x28 MNIST) halve exactly; the result is cropped back to the input size.
struct DownsampleSchedule {
  int steps{3};
  int final_res{4};
  int pad_to{0};  // 0: no padding

  Image apply(const Image& x, int t) const {
    if (t < 0 || t > steps) throw std::out_of_range("downsample: step outside [0, T]");
    if (t == 0) return x;
    if (pad_to > 0 && (x.height() != pad_to || x.width() != pad_to)) {
      return crop_centered(downsample_degrade(pad_centered(x, pad_to), t, final_res), x.height(), x.width());
    }
    return downsample_degrade(x, t, final_res);
  }
};

}  // namespace colddiff
