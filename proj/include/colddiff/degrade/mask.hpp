#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/degrade/blur.hpp"

namespace colddiff {

enum class MaskCenterMode { random, image_center };

struct MaskCenter {
  int row{0};
  int col{0};
};

/// Gaussian gray-out schedule. Step i multiplies by z_{beta_i} = 1 - exp(-d^2 / (2 beta_i)),
/// where d is the distance to the mask center.
struct MaskSchedule {
  std::vector<double> betas;
  MaskCenterMode center_mode{MaskCenterMode::random};

  /// beta_1 = first, beta_{i+1} = beta_i + increment.
  static MaskSchedule arithmetic(int steps, double first = 1.0, double increment = 0.1,
                                 MaskCenterMode mode = MaskCenterMode::random) {
    MaskSchedule m;
    m.center_mode = mode;
    for (int i = 0; i < steps; ++i) m.betas.push_back(first + increment * i);
    m.validate();
    return m;
  }

  int steps() const { return static_cast<int>(betas.size()); }

  void validate() const {
    if (betas.empty()) throw std::invalid_argument("MaskSchedule: need at least one step");
    for (std::size_t i = 0; i < betas.size(); ++i) {
      if (!(betas[i] > 0.0)) throw std::invalid_argument("MaskSchedule: beta must be positive");
      if (i > 0 && !(betas[i] > betas[i - 1])) throw std::invalid_argument("MaskSchedule: beta must be strictly increasing");
    }
  }
};

inline MaskCenter draw_mask_center(int height, int width, MaskCenterMode mode, RngStream& rng) {
  if (mode == MaskCenterMode::image_center) return {height / 2, width / 2};
  return {static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(height))),
          static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(width)))};
}

/// Single-step mask z_beta on an H x W grid.
inline std::vector<double> step_mask(int height, int width, double beta, MaskCenter center) {
  std::vector<double> z(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double dr = r - center.row;
      const double dc = c - center.col;
      z[static_cast<std::size_t>(r * width + c)] = 1.0 - std::exp(-(dr * dr + dc * dc) / (2.0 * beta));
    }
  }
  return z;
}

/// Cumulative mask G_t = prod_{i<=t} z_{beta_i}; all ones at t = 0.
inline std::vector<double> cumulative_mask(int height, int width, int t, const MaskSchedule& sched, MaskCenter center) {
  check_step(t, sched.steps(), "cumulative_mask");
  std::vector<double> g(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 1.0);
  for (int i = 1; i <= t; ++i) {
    const auto z = step_mask(height, width, sched.betas[static_cast<std::size_t>(i - 1)], center);
    for (std::size_t p = 0; p < g.size(); ++p) g[p] *= z[p];
  }
  return g;
}

inline double round_decimals(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

/// Masked pixels are rounded to this many decimals so the mask's floating-point
/// residue cannot leak information to the restorer.
inline constexpr int kMaskRoundingDigits = 8;

/// D(x, t) = x * G_t (entrywise), rounded to 8 decimals for t >= 1.
inline Image mask_degrade(const Image& x, int t, const MaskSchedule& sched, MaskCenter center) {
  check_step(t, sched.steps(), "mask_degrade");
  if (t == 0) return x;
  const auto g = cumulative_mask(x.height(), x.width(), t, sched, center);
  Image out(x.shape());
  const auto c = static_cast<std::size_t>(x.channels());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = round_decimals(x[i] * g[i / c], kMaskRoundingDigits);
  return out;
}

/// D(x, t) = G_t * x + (1 - G_t) * color.
inline Image solid_color_mask_degrade(const Image& x, int t, const MaskSchedule& sched, MaskCenter center,
                                      std::span<const double> color) {
  check_step(t, sched.steps(), "solid_color_mask_degrade");
  if (color.size() != static_cast<std::size_t>(x.channels())) {
    throw std::invalid_argument("solid_color_mask_degrade: color must have one entry per channel");
  }
  if (t == 0) return x;
  const auto g = cumulative_mask(x.height(), x.width(), t, sched, center);
  Image out(x.shape());
  const auto c = static_cast<std::size_t>(x.channels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double gi = g[i / c];
    out[i] = gi * x[i] + (1.0 - gi) * color[i % c];
  }
  return out;
}

}  // namespace colddiff
