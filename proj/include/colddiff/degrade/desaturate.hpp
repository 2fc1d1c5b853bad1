#pragma once

#include <stdexcept>

#include "colddiff/core/image.hpp"
#include "colddiff/degrade/blur.hpp"

namespace colddiff {

/// Applies the 1x1 filter bank z(alpha): out_c = alpha * mean(R, G, B) + (1 - alpha) * in_c.
inline Image desaturate(const Image& x, double alpha) {
  if (x.channels() != 3) throw std::invalid_argument("desaturate: requires a 3-channel image");
  Image out(x.shape());
  for (std::size_t p = 0; p < x.shape().pixels(); ++p) {
    const std::size_t i = 3 * p;
    const double mean = (x[i] + x[i + 1] + x[i + 2]) / 3.0;
    for (std::size_t c = 0; c < 3; ++c) out[i + c] = alpha * mean + (1.0 - alpha) * x[i + c];
  }
  return out;
}

/// D(x, t) = z(t / T) * x.
inline Image desaturate_degrade(const Image& x, int t, int steps) {
  if (x.channels() != 3) throw std::invalid_argument("desaturate_degrade: requires a 3-channel image");
  check_step(t, steps, "desaturate_degrade");
  if (t == 0) return x;
  return desaturate(x, static_cast<double>(t) / static_cast<double>(steps));
}

}  // namespace colddiff
