#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "colddiff/core/image.hpp"
#include "colddiff/degrade/blur.hpp"

namespace colddiff {

/// Interpolation weights alpha_0 .. alpha_T with alpha_0 = 1, strictly decreasing.
class InterpSchedule {
 public:
  InterpSchedule() = default;

  explicit InterpSchedule(std::vector<double> alphas) : alphas_{std::move(alphas)} {
    if (alphas_.size() < 2) throw std::invalid_argument("InterpSchedule: need alpha_0 and at least one step");
    if (alphas_[0] != 1.0) throw std::invalid_argument("InterpSchedule: alpha_0 must be 1");
    for (std::size_t t = 1; t < alphas_.size(); ++t) {
      if (!(alphas_[t] < alphas_[t - 1]) || alphas_[t] < 0.0) {
        throw std::invalid_argument("InterpSchedule: alphas must be strictly decreasing and nonnegative");
      }
    }
  }

  /// alpha_t = f(t) / f(0), f(t) = cos^2(((t / horizon) + offset) / (1 + offset) * pi / 2),
  /// truncated to the first `steps` entries of a `horizon`-step schedule.
  static InterpSchedule cosine(int steps, int horizon = 0, double offset = 0.008) {
    if (horizon <= 0) horizon = steps;
    if (steps < 1 || steps > horizon) throw std::invalid_argument("InterpSchedule::cosine: need 1 <= steps <= horizon");
    auto f = [&](int t) {
      const double c = std::cos((static_cast<double>(t) / horizon + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
      return c * c;
    };
    const double f0 = f(0);
    std::vector<double> a(static_cast<std::size_t>(steps) + 1);
    a[0] = 1.0;
    for (int t = 1; t <= steps; ++t) a[static_cast<std::size_t>(t)] = f(t) / f0;
    return InterpSchedule(std::move(a));
  }

  int steps() const { return static_cast<int>(alphas_.size()) - 1; }
  double alpha(int t) const { return alphas_.at(static_cast<std::size_t>(t)); }
  const std::vector<double>& alphas() const { return alphas_; }

 private:
  std::vector<double> alphas_{1.0, 0.0};
};

/// sqrt(alpha) x + sqrt(1 - alpha) z.
inline Image interpolate(const Image& x, const Image& anchor, double alpha) {
  Image::require_same_shape(x, anchor, "interp_degrade");
  return lincomb(std::sqrt(alpha), x, std::sqrt(1.0 - alpha), anchor);
}

/// D(x, t) = sqrt(alpha_t) x + sqrt(1 - alpha_t) z, unclamped.
inline Image interp_degrade(const Image& x, int t, const InterpSchedule& sched, const Image& anchor) {
  check_step(t, sched.steps(), "interp_degrade");
  Image::require_same_shape(x, anchor, "interp_degrade");
  if (t == 0) return x;
  return interpolate(x, anchor, sched.alpha(t));
}

}  // namespace colddiff
