#pragma once

#include "colddiff/core/image.hpp"
#include "colddiff/core/rng.hpp"

namespace colddiff {

/// Training-time toggles used for CIFAR-10.
struct Augment {
  bool random_crop{false};  // zero-pad by `pad`, crop back to the original size
  bool random_flip{false};  // horizontal, probability 1/2
  int pad{4};

  bool enabled() const { return random_crop || random_flip; }
};

inline Image flip_horizontal(const Image& x) {
  Image out(x.shape());
  for (int y = 0; y < x.height(); ++y)
    for (int c = 0; c < x.width(); ++c)
      for (int ch = 0; ch < x.channels(); ++ch) out.at(y, c, ch) = x.at(y, x.width() - 1 - c, ch);
  return out;
}

/// Window at offset (dy, dx) of the zero-padded image; offsets range over [0, 2 pad].
inline Image padded_crop(const Image& x, int pad, int dy, int dx) {
  Image out(x.shape());
  for (int y = 0; y < x.height(); ++y) {
    const int sy = y + dy - pad;
    if (sy < 0 || sy >= x.height()) continue;
    for (int c = 0; c < x.width(); ++c) {
      const int sx = c + dx - pad;
      if (sx < 0 || sx >= x.width()) continue;
      for (int ch = 0; ch < x.channels(); ++ch) out.at(y, c, ch) = x.at(sy, sx, ch);
    }
  }
  return out;
}

inline Image augment(const Image& x, const Augment& a, RngStream& rng) {
  Image out = x;
  if (a.random_crop && a.pad > 0) {
    const int dy = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(2 * a.pad + 1)));
    const int dx = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(2 * a.pad + 1)));
    out = padded_crop(out, a.pad, dy, dx);
  }
  if (a.random_flip && rng.uniform() < 0.5) out = flip_horizontal(out);
  return out;
}

}  // namespace colddiff
