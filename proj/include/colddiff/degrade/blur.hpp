#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/degrade/convolution.hpp"

namespace colddiff {

/// Per-step Gaussian widths for recursive blurring. Step s (1-based) blurs
/// with a `kernel_size` square kernel of width sigma(s); D(x, t) applies steps
/// 1..t in order.
class BlurSchedule {
 public:
  BlurSchedule() = default;

  BlurSchedule(int kernel_size, std::vector<double> sigmas) : kernel_size_{kernel_size}, sigmas_{std::move(sigmas)} {
    if (kernel_size_ < 1 || kernel_size_ % 2 == 0) throw std::invalid_argument("BlurSchedule: kernel size must be odd");
    if (sigmas_.empty()) throw std::invalid_argument("BlurSchedule: need at least one step");
    for (std::size_t s = 0; s < sigmas_.size(); ++s) {
      if (!(sigmas_[s] > 0.0)) throw std::invalid_argument("BlurSchedule: sigma must be positive");
      if (s > 0 && sigmas_[s] < sigmas_[s - 1]) throw std::invalid_argument("BlurSchedule: sigma must be nondecreasing");
    }
    kernels_.reserve(sigmas_.size());
    for (double sigma : sigmas_) kernels_.push_back(gaussian_kernel_1d(kernel_size_, sigma));
  }

  static BlurSchedule constant(int kernel_size, double sigma, int steps) {
    return BlurSchedule(kernel_size, std::vector<double>(static_cast<std::size_t>(steps), sigma));
  }

  /// sigma(s) = slope * s + offset
  static BlurSchedule linear(int kernel_size, double slope, double offset, int steps) {
    std::vector<double> s(static_cast<std::size_t>(steps));
    for (int i = 1; i <= steps; ++i) s[static_cast<std::size_t>(i - 1)] = slope * i + offset;
    return BlurSchedule(kernel_size, std::move(s));
  }

  enum class Growth { compound, natural };

  /// sigma(s) = sigma0 * (1 + rate)^(s-1)  (compound) or sigma0 * e^(rate (s-1))  (natural).
  static BlurSchedule exponential(int kernel_size, double sigma0, double rate, int steps,
                                  Growth growth = Growth::compound) {
    std::vector<double> s(static_cast<std::size_t>(steps));
    for (int i = 1; i <= steps; ++i) {
      s[static_cast<std::size_t>(i - 1)] = growth == Growth::compound ? sigma0 * std::pow(1.0 + rate, i - 1)
                                                                      : sigma0 * std::exp(rate * (i - 1));
    }
    return BlurSchedule(kernel_size, std::move(s));
  }

  int kernel_size() const { return kernel_size_; }
  int steps() const { return static_cast<int>(sigmas_.size()); }
  const std::vector<double>& sigmas() const { return sigmas_; }
  double sigma(int s) const { return sigmas_.at(static_cast<std::size_t>(s - 1)); }
  const std::vector<double>& kernel(int s) const { return kernels_.at(static_cast<std::size_t>(s - 1)); }

  /// 1-D factor of the composed kernel G_1 * ... * G_t (length t*(size-1)+1).
  std::vector<double> composed_kernel(int t) const {
    std::vector<double> k{1.0};
    for (int s = 1; s <= t; ++s) k = convolve_kernels(k, kernel(s));
    return k;
  }

 private:
  int kernel_size_{1};
  std::vector<double> sigmas_;
  std::vector<std::vector<double>> kernels_;
};

inline void check_step(int t, int steps, const char* what) {
  if (t < 0 || t > steps) {
    throw std::out_of_range(std::string(what) + ": step " + std::to_string(t) + " outside [0, " +
                            std::to_string(steps) + "]");
  }
}

/// Applies blur steps first+1 .. last to an image already at level `first`.
inline Image blur_advance(Image x, int first, int last, const BlurSchedule& sched) {
  for (int s = first + 1; s <= last; ++s) x = convolve_separable(x, sched.kernel(s));
  return x;
}

/// D(x, t): t sequential convolutions.
inline Image blur_degrade(const Image& x, int t, const BlurSchedule& sched) {
  check_step(t, sched.steps(), "blur_degrade");
  return blur_advance(x, 0, t, sched);
}

/// D(x, t) via the single precomposed kernel. Matches blur_degrade away from
/// the borders; near the borders the reflections differ.
inline Image blur_degrade_precomposed(const Image& x, int t, const BlurSchedule& sched) {
  check_step(t, sched.steps(), "blur_degrade_precomposed");
  if (t == 0) return x;
  return convolve_separable(x, sched.composed_kernel(t));
}

}  // namespace colddiff
