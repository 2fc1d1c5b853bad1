#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/degrade/blur.hpp"
#include "colddiff/degrade/convolution.hpp"

namespace colddiff {

/// Snowification parameters. The severity c0(t) is the seed threshold and the
/// wind c1(t) is the motion-blur width; both move linearly from their start to
/// their end value over t = 1..T.
struct SnowSchedule {
  double mu{0.55};
  double sigma{0.3};
  double c0_start{1.15};
  double c0_end{0.7};
  double c1_start{0.05};
  double c1_end{16.0};
  int steps{200};
  double zoom{1.25};

  double c0(int t) const { return lerp(c0_start, c0_end, t); }
  double c1(int t) const { return lerp(c1_start, c1_end, t); }

 private:
  double lerp(double a, double b, int t) const {
    if (t < 1 || t > steps) throw std::out_of_range("SnowSchedule: step outside [1, T]");
    if (steps == 1) return a;
    return a + (b - a) * static_cast<double>(t - 1) / static_cast<double>(steps - 1);
  }
};

enum class MotionAxis { vertical, horizontal };

/// Frozen randomness of one snow realization: the seed matrix S_A and the
/// motion-blur direction.
struct SnowSeed {
  Image matrix;  // H x W x 1
  MotionAxis axis{MotionAxis::horizontal};
};

inline SnowSeed draw_snow_seed(int height, int width, const SnowSchedule& sched, RngStream& rng) {
  SnowSeed seed{Image(height, width, 1), MotionAxis::horizontal};
  for (double& v : seed.matrix.data()) v = rng.normal(sched.mu, sched.sigma);
  seed.axis = (rng.next_u32() & 1u) ? MotionAxis::vertical : MotionAxis::horizontal;
  return seed;
}

namespace detail {
// Keys cubic convolution kernel, a = -0.5.
inline double cubic_weight(double d) {
  d = std::abs(d);
  constexpr double a = -0.5;
  if (d <= 1.0) return ((a + 2.0) * d - (a + 3.0)) * d * d + 1.0;
  if (d < 2.0) return ((a * d - 5.0 * a) * d + 8.0 * a) * d - 4.0 * a;
  return 0.0;
}
}  // namespace detail

/// Bicubic zoom of the upper-left (H / zoom) x (W / zoom) corner back to H x W.
inline Image zoom_upper_left(const Image& m, double zoom) {
  if (m.channels() != 1) throw std::invalid_argument("zoom_upper_left: expects a single-channel matrix");
  if (!(zoom >= 1.0)) throw std::invalid_argument("zoom_upper_left: zoom must be >= 1");
  const int h = m.height();
  const int w = m.width();
  Image out(h, w, 1);
  auto clamp_row = [h](int i) { return std::clamp(i, 0, h - 1); };
  auto clamp_col = [w](int i) { return std::clamp(i, 0, w - 1); };
  for (int r = 0; r < h; ++r) {
    const double sy = (r + 0.5) / zoom - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    for (int c = 0; c < w; ++c) {
      const double sx = (c + 0.5) / zoom - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      double acc = 0.0;
      for (int dy = -1; dy <= 2; ++dy) {
        const double wy = detail::cubic_weight(sy - (y0 + dy));
        for (int dx = -1; dx <= 2; ++dx) {
          acc += wy * detail::cubic_weight(sx - (x0 + dx)) * m.at(clamp_row(y0 + dy), clamp_col(x0 + dx));
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

/// S_C[i][j] = 0 if S_B[i][j] <= threshold, else S_B[i][j].
inline Image snow_threshold(const Image& sb, double threshold) {
  Image out(sb.shape());
  for (std::size_t i = 0; i < sb.size(); ++i) out[i] = sb[i] <= threshold ? 0.0 : sb[i];
  return out;
}

/// Normalized 1-D Gaussian of the given width; length 2 * ceil(3 sigma) + 1.
inline std::vector<double> motion_blur_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("motion_blur_kernel: sigma must be positive");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  return gaussian_kernel_1d(2 * radius + 1, sigma);
}

inline Image rotate180(const Image& m) {
  Image out(m.shape());
  const int h = m.height();
  const int w = m.width();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < m.channels(); ++ch) out.at(h - 1 - r, w - 1 - c, ch) = m.at(r, c, ch);
    }
  }
  return out;
}

/// Snow layer S for severity `threshold` and wind `blur_sigma`.
inline Image snow_layer(const SnowSeed& seed, double threshold, double blur_sigma, double zoom) {
  Image sc = clamp_unit(snow_threshold(zoom_upper_left(seed.matrix, zoom), threshold));
  return convolve_axis(sc, motion_blur_kernel(blur_sigma), seed.axis == MotionAxis::vertical ? Axis::rows : Axis::cols);
}

/// h(x, S_A, c0(t), c1(t)) = clip(x + S + S'). Step 0 adds no snow.
inline Image snow_degrade(const Image& x, int t, const SnowSchedule& sched, const SnowSeed& seed) {
  if (x.channels() != 3) throw std::invalid_argument("snow_degrade: requires a 3-channel image");
  check_step(t, sched.steps, "snow_degrade");
  if (seed.matrix.height() != x.height() || seed.matrix.width() != x.width()) {
    throw std::invalid_argument("snow_degrade: seed matrix does not match image size");
  }
  if (t == 0) return x;
  const Image s = snow_layer(seed, sched.c0(t), sched.c1(t), sched.zoom);
  const Image s_rot = rotate180(s);
  Image out(x.shape());
  for (std::size_t p = 0; p < x.shape().pixels(); ++p) {
    const double add = s[p] + s_rot[p];
    for (std::size_t c = 0; c < 3; ++c) out[3 * p + c] = std::clamp(x[3 * p + c] + add, 0.0, 1.0);
  }
  return out;
}

}  // namespace colddiff
